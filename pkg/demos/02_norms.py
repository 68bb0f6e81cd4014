# %% [markdown]
# Luxemburg and anisotropic Sobolev norms on a cell-centred grid.

# %%
from holderlab.exponents import ExponentVectorField
from holderlab.grid import build_grid, sample
from holderlab.norms import luxemburg_norm, modular, sobolev_norm

g = build_grid(2, [(0, 1), (0, 1)], 256)
u = sample(g, "sin(pi*x1)*sin(pi*x2)")
r = luxemburg_norm(u, sample(g, "2"))
print("L2 norm", r.value, "after", r.iterations, "bisection steps")  # exact value 1/2

# %%
# Variable exponent: the modular of u/||u|| sits on the unit sphere.
p = sample(g, "2 + x1*x2")
n = luxemburg_norm(u, p).value
print(n, modular(u * (1 / n), p))

# %%
# Masked domain: a disc, one exponent per direction.
disc = build_grid(2, [(-1, 1), (-1, 1)], 128, "x1^2 + x2^2 < 1")
pv = ExponentVectorField.from_exprs(disc, ["3 + x1", "4"])
print(disc.describe())
print(sobolev_norm(sample(disc, "x1^2 - x2"), pv).to_dict())
