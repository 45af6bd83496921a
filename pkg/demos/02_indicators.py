# %% [markdown]
# # Comparing the four cost indicators
#
# Same random vessels, graded once without noise and once with Gaussian
# noise plus salt-and-pepper speckle.

# %%
from vessel_trace import INDICATORS, ScanConfig, run_benchmark
from vessel_trace.harness import random_suite

cfgs = [ScanConfig(indicator=i) for i in INDICATORS]
shapes = ("flat", "slanted", "sine")

clean = random_suite(12, 1, shapes=shapes)
print("noiseless")
print(run_benchmark(clean, cfgs).format_table())

# %% [markdown]
# The relative-intensity indicator divides by the local mean, so speckle
# in dark regions swings it far more than the others.

# %%
noisy = random_suite(12, 2, shapes=shapes, noise_sigma=0.08, speckle_density=0.05)
print("\nnoisy")
report = run_benchmark(noisy, cfgs)
print(report.format_table())

for r in report.rows:
    print(f"{r.indicator:>20}: {r.true_rate:5.1f}% true")
