"""Sparse linear systems with L2 condition numbers and a-posteriori error bounds."""

__version__ = "0.1.0"

from ._backend import active as active_backend, available as available_backends, use_backend
from .bench import (BenchConfig, BenchReport, GeneratorSpec, bootstrap_ci,
                    generate_illconditioned, generate_system, run_bench)
from .condest import (AdamConfig, AdamState, CondEstimate, NormEstimate, cond2, grad_explicit,
                      grad_inverse, inv_norm2, loss_explicit, loss_inverse, norm2, projected_adam)
from .error_analysis import (EPS_MACH, BoundsReport, is_numerically_singular, loose_bounds,
                             propagate_bound, singularity_bound, tight_bounds, verify_solution)
from .exceptions import *  # noqa: F401,F403
from .factorization import LUFactors, ilu0, lu_factorize, lu_solve, lu_transpose_solve
from .matio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .solvers import (SolveOutcome, SolverSpec, bicgstab_kernel, gmres_kernel,
                      jacobi_preconditioner, solve)
from .sparse import (ScalingDiagonal, SparseMatrix, column_norms, column_scale, matvec,
                     row_norms, row_scale, transpose_matvec, two_norm, unscale_solution)
