# Clean-lattice spectra and how the bandwidth grows with N.
import numpy as np

from waveguide_arrays import ArrayConfig, clean_spectrum
from waveguide_arrays.lattice import clean_bandwidth_scaling_check

# uniform couplings: a cosine band
N = 50
info = clean_spectrum(ArrayConfig(N, alpha=0, C0=1))
exact = np.sort(2 * np.cos(np.arange(1, N + 1) * np.pi / (N + 1)))
print("alpha=0, N=50  max |E - 2cos(n pi/(N+1))| =", np.max(np.abs(info.eigenvalues.real - exact)))

# alpha=1: levels are equally spaced by 2 C0
info = clean_spectrum(ArrayConfig(30, alpha=1))
print("alpha=1, N=30  level spacings:", np.unique(np.round(np.diff(info.eigenvalues.real), 12)))

# bandwidth ~ N^alpha for alpha >= 0, saturating scale for alpha < 0
for alpha in (-1.0, 0.0, 1.0, 2.0):
    slope = clean_bandwidth_scaling_check(ArrayConfig(16, alpha), (16, 32, 64, 128, 256))
    print(f"alpha={alpha:+.0f}  fitted log-log slope of the bandwidth: {slope:.3f}")
