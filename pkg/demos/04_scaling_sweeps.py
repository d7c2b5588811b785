"""Fit flop and communication exponents for each method.

Each line of output is one row of the comparison: how total work and total
intermediate data grow with N or D while everything else is held fixed.
"""

from pca_costlab import ExperimentConfig, run_experiment

sweeps = [
    ("coveig vs D", ExperimentConfig(method="coveig", n=256, noise=1.0,
                                     sweep_axis="D", sweep_values=(8, 16, 32, 64))),
    ("svd vs D", ExperimentConfig(method="svd", n=256, noise=1.0,
                                  sweep_axis="D", sweep_values=(8, 16, 32, 64))),
    ("ssvd vs N", ExperimentConfig(method="ssvd", d_dims=16, workers=4,
                                   sweep_axis="N", sweep_values=(256, 512, 1024, 2048))),
    # five EM iterations at every point so the fit measures per-iteration cost
    ("ppca std vs N", ExperimentConfig(method="ppca", d_dims=8, noise=0.3, iters=5, tol=1e-12,
                                       sweep_axis="N", sweep_values=(256, 512, 1024, 2048))),
    ("ppca rec vs N", ExperimentConfig(method="ppca", mode="recompute", d_dims=16, noise=0.3,
                                       iters=5, tol=1e-12, workers=4,
                                       sweep_axis="N", sweep_values=(256, 512, 1024, 2048))),
]

for label, cfg in sweeps:
    rep = run_experiment(cfg)
    print(f"{label:14s} flops ~ x^{rep.flop_exponent:.2f}   "
          f"intermediate ~ x^{rep.communication_exponent:.2f}")
