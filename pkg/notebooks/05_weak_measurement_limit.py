# %% [markdown]
# # Reading the weak value off the spin
#
# Without compensation, a small rotation alpha on path 1 tilts the
# post-selected spin.  <sigma_y> carries the real part of the weak value
# and <sigma_z> the imaginary part, each scaled by alpha.

# %%
import numpy as np

from pathpresence import BeamConfig, analytic, qcore

cfg = BeamConfig.from_ratio(4, 1, chi=0.7)
target = analytic.weak_value(1, "+", cfg).value
print("weak value", target)

# %%
for alpha in (0.1, 0.01, 0.001):
    state = qcore.pipeline(cfg, alpha, 0.0, port="+")
    _, sy, sz = qcore.spin_vector(state)
    est = analytic.weak_measurement_estimate(sy, sz, alpha)
    print(f"alpha {alpha:<6} estimate {est:.6f}  error {abs(est - target):.2e}")

# %% [markdown]
# The error falls as alpha squared.
#
# In a real instrument alpha comes from a field and a transit time.

# %%
bz = analytic.angle_to_field(np.pi / 16, tau=1e-4)
print(f"{bz * 1e6:.3f} uT for pi/16 over 100 us", analytic.field_to_angle(bz, 1e-4))
