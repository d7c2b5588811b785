"""Walk through the counted kernels on a small tall matrix."""

import numpy as np

from pca_costlab import FlopCounter, bidiag_svd, bidiagonalize, qr_decompose, sym_eig

rng = np.random.default_rng(0)
Z = rng.standard_normal((12, 4))
counter = FlopCounter()

# thin QR by Givens rotations
with counter.phase("qr"):
    Q, R = qr_decompose(Z, counter)
print("QR residual", np.linalg.norm(Q @ R - Z))
print("R diagonal", np.round(np.diag(R), 4))

# R = U1 B V1 with B upper bidiagonal
with counter.phase("bidiagonalize"):
    U1, B, V1 = bidiagonalize(R, counter)
print("B =\n", np.round(B, 4))

# implicit-shift QR sweeps on B
with counter.phase("bidiag_svd"):
    svd = bidiag_svd(B, counter=counter)
print("singular values", svd.sigma, "after", svd.iterations, "steps")
print("numpy agrees  ", np.linalg.svd(Z, compute_uv=False))

# Jacobi on the Gram matrix gives the squares
with counter.phase("jacobi"):
    eig = sym_eig(Z.T @ Z, counter=counter)
print("sqrt eigenvalues", np.sqrt(eig.values), "after", eig.sweeps, "sweeps")

print("flops by phase", counter.by_phase)
print("adds/muls/divs_sqrts", counter.adds, counter.muls, counter.divs_sqrts)
