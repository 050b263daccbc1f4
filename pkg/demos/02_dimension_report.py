# %% [markdown]
# # Dimension report and the maximal-dimension measure
#
# The Julia set dimension is the sum of the two Bowen roots.  The best
# single equilibrium state sits strictly between them.

# %%
from henondim import dimension, maps, orbits, pressure

g = maps.quadratic(-6, 0.2)
lib = orbits.enumerate_orbits(g, 12, jobs=0)
rep = dimension.dimension_report(lib, 12)
print(rep.to_text())

# %% [markdown]
# The dimension curve over [t_s, t_u].  The peak is shallow, so d(g) is only
# slightly below dim J for this map.

# %%
ev = pressure.LibraryPressure(lib, 12)
for k in range(11):
    t = rep.t_s + (rep.t_u - rep.t_s) * k / 10
    print(f"{t:.4f}  {ev.sample(t).Delta:.8f}")

# %% [markdown]
# Convergence in the period cutoff.

# %%
for n in (6, 8, 10, 12):
    r = dimension.dimension_report(lib, n)
    print(n, f"t_u={r.t_u:.10f}  d_g={r.d_g:.10f}  gap={r.gap:.3e}  err={r.err_est:.1e}")

# %% [markdown]
# A volume-preserving map: both roots coincide.

# %%
g1 = maps.quadratic(-10, 1.0)
r1 = dimension.dimension_report(orbits.enumerate_orbits(g1, 10, jobs=0), 10)
print(r1.t_u, r1.t_s, r1.diagnostics.verdict)
