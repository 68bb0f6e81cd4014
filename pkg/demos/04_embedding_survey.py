# %% [markdown]
# Empirical embedding constant: largest Hölder/Sobolev ratio over a random
# trigonometric family, tracked through grid refinement.

# %%
from holderlab.embedlab import FunctionFamily, embedding_survey
from holderlab.pairs import PairScanPolicy

family = FunctionFamily(count=20, max_frequency=3, seed=0)
print(family.sources()[0])

report = embedding_survey(
    ["4 - 0.1*x", "3 + 0.2*y"], family, [(0, 1), (0, 3)], [32, 64, 128],
    PairScanPolicy(seed=0),
)

# %%
for lv in report.levels:
    print(lv["resolution"], lv["max_ratio"], "worst member", lv["argmax_function"])

# %%
import csv
import sys

csv.writer(sys.stdout).writerows(list(report.csv_rows())[:6])
