"""Coordinate descent: linear rate, momentum bound and where the latter wins.

For coordinates sampled with probability ``A_ii / trace(A)`` the linear rate
is ``lambda_min(A) / trace(A)``. Momentum with ``eta = 1/2`` instead gives an
``O(trace(A) / eps)`` iteration bound that does not depend on
``lambda_min``. It is the better bound when the scaled precision falls in the
interval returned by ``superiority_region``.
"""

import numpy as np

from sketchsolve import DiscreteSketchEnsemble, cd_complexities, rate_rho, superiority_region
from sketchsolve.linalg import eig_sym

rng = np.random.default_rng(0)
Q = np.linalg.qr(rng.standard_normal((50, 50)))[0]
for kappa in (10.0, 100.0, 1e4):
    A = Q @ np.diag(np.geomspace(1.0, kappa, 50)) @ Q.T
    rho = rate_rho(A, DiscreteSketchEnsemble.coordinate(A))
    lmax = eig_sym(A)[0][-1]
    print(f"kappa={kappa:g}: rho={rho:.3e} (lambda_min/trace={1.0 / np.trace(A):.3e})")
    region = superiority_region(kappa)
    if region is None:
        print("  momentum bound never better (kappa < 16)")
        continue
    print(f"  momentum bound better for scaled precision in [{region[0]:.4f}, {region[1]:.4f}]")
    for eps_hat in (0.5, 1e-3):
        t_mom, t_plain = cd_complexities(A, eps_hat * lmax)
        print(f"  eps_hat={eps_hat:g}: momentum {t_mom:.3g} vs plain {t_plain:.3g} iterations")
