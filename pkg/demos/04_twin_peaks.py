# With strongly graded couplings the light localizes at the input and at its mirror site.
import numpy as np

from waveguide_arrays import ArrayConfig, DisorderSpec, EnsembleConfig, InputSpec, SeedPolicy, run_ensemble

N, m0 = 50, 8
for strength in (0.05, 0.02):
    res = run_ensemble(ArrayConfig(N, 2), DisorderSpec("onsite_gaussian", strength), InputSpec.single(m0),
                       EnsembleConfig(Nr=1000, seed_policy=SeedPolicy(4)))
    p = res.steady_profile
    med = np.median(p)
    print(f"strength {strength}: I({m0})/median = {p[m0 - 1] / med:.2f}, I({N + 1 - m0})/median = {p[N - m0] / med:.2f}")
