"""
Checking the estimator on data with a known answer
==================================================

The survey microdata behind the published estimates is not public, so the
estimator is checked on synthetic panels instead. Each replication draws a
fresh survey with a known treatment effect, runs the same screening and
emission code as real data, and fits the model. Across replications the
estimates should centre on the truth, and nominal 95% intervals should
cover it about 95% of the time.
"""

# %%
# A zero-noise panel is recovered exactly
# ---------------------------------------
from railcarbon import SimConfig, recovery_experiment
from railcarbon.report import recovery_table

exact = recovery_experiment(SimConfig(tau=-3145.0, noise_sd=0.0, households_per_cell=40), 3)
print(f"bias with no noise: {exact.bias:.2e}")

# %%
# With realistic noise
# --------------------
# Household noise with an 8000 g/day standard deviation is close to the
# spread of observed daily emissions. A short run keeps this demo quick;
# the acceptance suite uses 500 replications.
noisy = recovery_experiment(SimConfig(tau=-3145.0, noise_sd=8000.0, households_per_cell=80), 60)
print(recovery_table(noisy, "Estimator recovery, 60 replications"))

# %%
# RMSE shrinks as the panel grows
# -------------------------------
from dataclasses import replace

base = SimConfig(tau=-3145.0, noise_sd=8000.0, seed=7)
for n in (20, 80, 320):
    r = recovery_experiment(replace(base, households_per_cell=n), 20, spec=())
    print(f"{n:4d} households per cell: RMSE {r.rmse:8.1f}")
