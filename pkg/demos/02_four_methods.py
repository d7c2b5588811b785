"""Run all four PCA methods on one dataset and compare subspaces."""

import numpy as np

from pca_costlab import (PpcaParams, SsvdParams, gen_synthetic, largest_principal_angle,
                         pca_cov_eig, pca_svd_bidiag, ppca_em, ssvd)

A = gen_synthetic(200, 12, rank=3, noise_sigma=0.05, seed=1)
d = 3

exact = pca_cov_eig(A, d)
results = {
    "svd": pca_svd_bidiag(A, d),
    "ssvd": ssvd(A, SsvdParams(d, p=5, j=2, seed=0)),
    "ppca": ppca_em(A, PpcaParams(d, max_iter=200, tol=1e-8, seed=0)),
}

print("coveig values", np.round(exact.values, 3))
for name, res in results.items():
    angle = largest_principal_angle(res.components, exact.components)
    print(f"{name:5s} values {np.round(res.values, 3)}  angle {angle:.2e}  "
          f"iterations {res.iterations_used}")

# EM history. The stopping test watches the subspace, which settles long
# before the noise variance does, so sigma2 is still on its way down here.
ppca = results["ppca"]
print("sigma2 first/last", ppca.diagnostics["sigma2_history"][:3],
      ppca.diagnostics["sigma2"])
print("converged", ppca.converged)
