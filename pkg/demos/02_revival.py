# Perfect state transfer and revival in the alpha=1 lattice.
import math

import numpy as np

from waveguide_arrays import ArrayConfig, InputSpec, clean_spectrum, intensity, make_input, propagate_hermitian

N = 30
info = clean_spectrum(ArrayConfig(N, alpha=1), vectors=True)
psi0 = make_input(InputSpec.single(4), N)

# the packet reaches the mirror site at t = pi/2 and comes back at t = pi
for t in (0.0, math.pi / 4, math.pi / 2, math.pi):
    I = intensity(propagate_hermitian(info.eigenvalues.real, info.eigenvectors, psi0, t))
    print(f"t={t:5.3f}  brightest waveguide {np.argmax(I) + 1:2d}  I_max={I.max():.6f}")

# the same holds for any input, since every phase e^{-iE pi} is the same
rng = np.random.default_rng(0)
psi = rng.normal(size=N) + 1j * rng.normal(size=N)
psi /= np.linalg.norm(psi)
back = propagate_hermitian(info.eigenvalues.real, info.eigenvectors, psi, math.pi)
print("random input, |<psi|psi(pi)>| =", abs(np.vdot(psi, back)))
