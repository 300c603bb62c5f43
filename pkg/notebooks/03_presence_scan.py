# %% [markdown]
# # Presence as the coupling weakens
#
# The fitted peak divided by alpha approaches the weak value 2/3 for
# port + and 2 for port - as alpha shrinks.

# %%
import numpy as np

from pathpresence import BeamConfig, estimator

cfg = BeamConfig.from_ratio(4, 1)
alphas = [np.pi / 4, np.pi / 8, np.pi / 16, np.pi / 32]
points = estimator.presence_scan(alphas, cfg, "interference", counts=20_000, seed=7)

# %%
print(f"{'alpha/pi':>9} {'label':>6} {'fit':>8} {'+-':>7} {'exact':>8} {'weak':>6}")
for p in points:
    print(f"{p.alpha / np.pi:9.4f} {p.label:>6} {p.presence:8.4f} {p.presence_std:7.4f} {p.theory_exact:8.4f} {p.theory_weak:6.3f}")

# %% [markdown]
# The error bars grow as alpha shrinks.  Presence is a ratio with alpha
# in the denominator, so a fixed angular error means more at small alpha.
#
# In the which-way context the answer is 1 or 0 at any coupling.

# %%
for p in estimator.presence_scan(alphas[:2], cfg, "whichway", counts=20_000, seed=8):
    print(p.label, round(p.presence, 4), "+-", round(p.presence_std, 4))
