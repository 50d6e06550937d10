# PT-symmetric gain/loss disorder and tunneling disorder leave similar correlation fingerprints.
import numpy as np

from waveguide_arrays import (
    ArrayConfig, DisorderSpec, EnsembleConfig, InputSpec, SeedPolicy, build_hamiltonian, clean_spectrum,
    resolve_sigma, run_ensemble, sample_realization, spectrum,
)

arr = ArrayConfig(20, 0)
pt = DisorderSpec("pt_onsite", 0.02)
sigma = resolve_sigma(pt, clean_spectrum(arr))
imag = [spectrum(build_hamiltonian(arr, sample_realization(pt, arr, sigma, SeedPolicy(1).stream(r)))).max_imag
        for r in range(100)]
print("fraction of PT realizations with complex levels:", np.mean(np.array(imag) > 1e-8))

ens = EnsembleConfig(Nr=300, phase_samples=8, seed_policy=SeedPolicy(5))
for spec in (pt, DisorderSpec("tunneling_uniform", 0.02)):
    res = run_ensemble(arr, spec, InputSpec.pair(9, 10), ens)
    g = res.g_function / res.g_function[0]
    print(f"{spec.model.value:18s} g/g(0) for dr=0..6:", np.round(g[:7], 3))
