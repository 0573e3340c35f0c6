"""dbmlab: a numerical laboratory for coupled eigenvalue flows of random
symmetric matrices, closed-form heat-kernel smoothing, and mesoscopic
linear eigenvalue statistics."""

from ._kernels import BACKEND
from .ensembles import EnsembleSpec, Spectrum, SymmetricMatrix, eigenvalues, matrix_flow, sample_generalized_wigner
from .semicircle import QuantileTable, density, rigidity_report, stieltjes, typical_locations
from .kernel import HeatKernelAntiderivative, HeatKernelEval, PartitionOfUnity, apply_K, heat_kernel, psi_apply
from .dynamics import Trajectory, dbm_step, evolve_parabolic, homogenization_residual, run_coupled
from .stats import LinearStatistic, Observable2D, clt_parameters, linear_statistic, q_sum

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "EnsembleSpec",
    "Spectrum",
    "SymmetricMatrix",
    "eigenvalues",
    "matrix_flow",
    "sample_generalized_wigner",
    "QuantileTable",
    "density",
    "rigidity_report",
    "stieltjes",
    "typical_locations",
    "HeatKernelAntiderivative",
    "HeatKernelEval",
    "PartitionOfUnity",
    "apply_K",
    "heat_kernel",
    "psi_apply",
    "Trajectory",
    "dbm_step",
    "evolve_parabolic",
    "homogenization_residual",
    "run_coupled",
    "LinearStatistic",
    "Observable2D",
    "clt_parameters",
    "linear_statistic",
    "q_sum",
]
