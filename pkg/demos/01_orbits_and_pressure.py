# %% [markdown]
# # Periodic orbits and the pressure curve
#
# We take the quadratic map (z, w) -> (w, w**2 - 6 + 0.2 z), collect every
# periodic orbit up to period 10 and turn the unstable multipliers into a
# pressure curve.

# %%
import math

import numpy as np

from henondim import maps, orbits, pressure

g = maps.quadratic(-6, 0.2)
print(maps.characterize(g))   # (degree, |det Dg|, volume class)

# %% [markdown]
# Orbits are labelled by itineraries over the two inverse branches of
# w**2 - 6.  Only canonical primitive words are stored; the count of fixed
# points of g^n is recovered from them.

# %%
lib = orbits.enumerate_orbits(g, 10, jobs=0)
for n in range(1, 11):
    print(n, len(lib.orbits[n]), lib.fixed_point_count(n), 2**n)

# %%
fixed = lib.orbits[1]
for o in fixed:
    print(o.itinerary.to_str(2), o.w0, "log|lambda_u| =", o.log_mult_u)

# %% [markdown]
# Expansion rates per step spread over an interval; a single value would
# mean the pressure is affine.

# %%
rates = np.array([o.rate for o in lib.all_orbits()])
print("rates in [%.4f, %.4f]" % (rates.min(), rates.max()))

# %%
curve = pressure.build_curve(lib, pressure.t_grid(0, 1, 0.1), 10)
for s in curve.samples:
    print(f"t={s.t:.1f}  P_u={s.P_u:+.6f}  Lambda={s.Lambda:.6f}  h={s.h:.6f}  err={s.err_est:.1e}")

# %% [markdown]
# At t = 0 the pressure is the topological entropy log 2.

# %%
print(curve.samples[0].P_u - math.log(2))
print("strictly decreasing:", curve.strictly_decreasing)
