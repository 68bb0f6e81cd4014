# %% [markdown]
# Refinement on cusp domains. Growth factors are ratios of consecutive
# maximal quotients; the distance column locates the worst pair.

# %%
from holderlab.embedlab import counterexample_run

for preset in ("mild-cusp", "pronounced-cusp"):
    r = counterexample_run(preset, [16, 32, 64, 128])
    print(preset, "skipped", r.skipped_levels)
    for lv in r.levels:
        print(f"  {lv['resolution']}  cells={lv['grid']['active_cells']:6d}  "
              f"q={lv['max_quotient']:.4f}  sobolev={lv['sobolev_norm']:.4f}  "
              f"dist={lv['argmax_distance_to_cusp']:.4f}")
    print("  growth", [round(x, 3) for x in r.growth_factors])

# %%
# On y > |x|^3 the exponents stay at or below 3, so beta <= 1/3 while
# sqrt(y - |x|^3) is 1/2-Hölder: the quotient levels off.
print(r.levels[-1]["beta"])
