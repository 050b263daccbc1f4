# %% [markdown]
# # Sweeping the constant term
#
# d(g) along c in [-8, -6] at a = 0.2, and a sub-mean-value probe on a
# small circle around c = -7.

# %%
from henondim import maps, sweep

family = sweep.FamilySpec(maps.quadratic(-7, 0.2), sweep.Slot("coeff", 0, 0), sweep.Segment(-8, -6, 11))
res = sweep.sweep(family, 10, jobs=0)
print(res.to_csv())
print("largest jump between neighbours:", res.continuity)

# %%
finer = sweep.FamilySpec(family.template, family.slot, sweep.Segment(-8, -6, 21))
print("with 21 samples:", sweep.sweep(finer, 10, jobs=0).continuity)

# %%
circle = sweep.FamilySpec(family.template, family.slot, sweep.Circle(-7, 0.2, 16))
print(sweep.submean_check(circle, 10, jobs=0).to_text())
