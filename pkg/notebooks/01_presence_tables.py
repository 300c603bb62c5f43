# %% [markdown]
# # Path presence in the two contexts
#
# A 4:1 beam (path 1 carries four fifths of the intensity) meets a spin
# rotation on path 1 only.  With path 2 blocked the rotation reports where
# the neutron went.  With both paths open and an exit port selected it
# reports a weak value instead.

# %%
from pathpresence import BeamConfig, presence_table, weak_value

cfg = BeamConfig.from_ratio(4, 1)
print(cfg.a1, cfg.a2, cfg.p1, cfg.p2)

# %% [markdown]
# Which-way context: presence is 1 or 0 and the average reproduces the
# path probabilities.

# %%
ww = presence_table(cfg, "whichway")
for row in ww.rows:
    print(row)
print("average", ww.average_path1, ww.average_path2, "std", ww.std_path1, ww.std_path2)

# %% [markdown]
# Interference context.  Port + gives 2/3 on path 1, port - gives 2 on
# path 1 and -1 on path 2.  The averages still come out as 4/5 and 1/5.

# %%
inter = presence_table(cfg, "interference")
for row in inter.rows:
    print(row)
print("average", inter.average_path1, inter.average_path2)

# %%
print(weak_value(1, "+", cfg), weak_value(2, "-", cfg))

# %% [markdown]
# Equal amplitudes leave port - dark.  Asking for its weak value fails loudly.

# %%
from pathpresence import DivergentWeakValueError

try:
    weak_value(1, "-", BeamConfig(2**-0.5, 2**-0.5))
except DivergentWeakValueError as exc:
    print("divergent:", exc)
