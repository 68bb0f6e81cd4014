# %% [markdown]
# Expression language: parsing, canonical text and evaluation.

# %%
import numpy as np

from holderlab.exprlang import (
    ExprSyntaxError, eval_expr, evaluate, parse_expr, parse_predicate, unparse,
)

for text in ["2+3*4", "2^3^2", "-2^2", "sin(pi*x)*exp(-y)"]:
    e = parse_expr(text)
    print(f"{text:22s} -> {unparse(e)}")

print(eval_expr(parse_expr("2^3^2"), []))

# %%
# Vectorized evaluation over a batch of points, one row per point.
pts = np.array([[0.0, 0.0], [0.5, 1.0], [1.0, 2.0]])
print(evaluate(parse_expr("sin(pi*x)*exp(-y)"), pts))

# %%
pred = parse_predicate("x1^2 < x2 & x2 < 2*x1^2")
print(unparse(pred))

try:
    parse_expr("3 + * x1")
except ExprSyntaxError as err:
    print("error at byte", err.offset, "expected", sorted(err.expected))
