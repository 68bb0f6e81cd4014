# %% [markdown]
# Direction-wise Hölder exponents from an exponent vector.

# %%
from holderlab.embedlab import corollary1_check, corollary2_trend
from holderlab.exponents import ExponentVectorField, beta_exponents, validate_hypotheses
from holderlab.grid import build_grid

g = build_grid(2, [(0, 1), (0, 3)], 64)
p = ExponentVectorField.from_exprs(g, ["4 - 0.1*x", "3 + 0.2*y"])
print(validate_hypotheses(p).to_dict())
print(beta_exponents(p).summary())

# %%
# Equal exponents in every direction collapse to 1 - N/p.
print(corollary1_check("3 + x1", 2, build_grid(2, [(0, 1), (0, 1)], 32)))

# %%
# Raising a constant exponent pushes beta toward 1.
print(corollary2_trend([3, 5, 10, 100], 2))
