# %% [markdown]
# # Exactly solvable linear models
#
# A two-branch model with log-multipliers (log 2, log 8) has pressure
# log(2**-t + 8**-t), so every quantity has a closed form.  The synthetic
# orbit library reproduces it through the same pipeline used for maps.

# %%
import math

from henondim import dimension, oracle

model = oracle.LinearModel((math.log(2), math.log(8)), math.log(0.25))
exact = oracle.exact_report(model)
piped = dimension.dimension_report(oracle.synthetic_library(model, 10), 10)
for f in ("t_u", "t_s", "dim_J", "d_g", "gap", "t_star"):
    print(f"{f:6s} {getattr(exact, f):.15f} {getattr(piped, f):.15f}")

# %% [markdown]
# Equal branches make the pressure affine and close the gap.

# %%
flat = oracle.LinearModel((math.log(4), math.log(4)), math.log(0.5))
print(oracle.exact_report(flat).gap, oracle.exact_report(flat).diagnostics.verdict)

# %%
for name, ok, detail in oracle.selftest():
    print("pass" if ok else "FAIL", name, detail)
