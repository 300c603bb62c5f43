# %% [markdown]
# # Measurement-error landscape
#
# Assign an estimate of "path 1" to each exit port and compute the
# mean-square error against the path-1 projector.  It vanishes exactly when
# the estimates are the weak values.

# %%
import numpy as np

from pathpresence import BeamConfig, analytic

cfg = BeamConfig.from_ratio(4, 1)
alpha = np.pi / 16
est = np.linspace(-1, 3, 61)  # step 1/15 hits both weak values
surface = np.array(
    [[analytic.ozawa_error(alpha, analytic.EstimateAssignment(ep, em), cfg) for em in est] for ep in est]
)
i, j = np.unravel_index(surface.argmin(), surface.shape)
print("minimum at", est[i], est[j], "eps2 =", surface[i, j])

# %% [markdown]
# Forcing one estimate for both ports leaves the path variance p1 p2 = 0.16.

# %%
common = [analytic.ozawa_error(alpha, analytic.EstimateAssignment(e, e), cfg) for e in est]
print(min(common), est[int(np.argmin(common))])

# %% [markdown]
# A nonzero error caps how well the spin can be refocused.

# %%
for e2 in (0.0, 0.01, 0.16):
    print(e2, analytic.max_sigma_x_from_error(alpha, e2))
