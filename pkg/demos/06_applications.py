# %% [markdown]
# The heat-conduction and porous-media presets.

# %%
from holderlab.embedlab import application_preset

for name in ("heat", "porous"):
    r = application_preset(name, 64)
    lv = r.levels[0]
    hyp = lv["hypothesis"]
    print(name, "violating cells:", hyp["violating_cells"], "of", hyp["active_cells"])
    print("  ratio", lv["max_ratio"])

# %%
# The same runs from the shell:
#   holderlab app porous --resolutions 64
#   holderlab app heat --resolutions 64                 # exits with status 4
#   holderlab app heat --allow-hypothesis-violation
