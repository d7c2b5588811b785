"""Principal component methods with distributed cost accounting."""

from .costsim import (CostReport, MethodSpec, Phase, WorkerPartition, fit_scaling_exponent,
                      partition_rows, run_phased)
from .errors import ConvergenceError, InvalidInputError, NumericalDegeneracyError, ParseError
from .flops import FlopCounter
from .harness import (ExperimentConfig, SweepReport, gen_synthetic, largest_principal_angle,
                      load_config, run_experiment)
from .linalg import (EigenPairs, GivensRotation, SvdResult, bidiag_svd, bidiagonalize, givens,
                     matmul, mean_center, qr_decompose, sym_eig)
from .methods import (MethodTag, PCAResult, PpcaMode, PpcaParams, SsvdParams, pca_cov_eig,
                      pca_svd_bidiag, ppca_em, reconstruction_error_1norm, ssvd)
from .mmio import load_matrix, save_matrix

__version__ = "0.1.0"
