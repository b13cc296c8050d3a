"""Free extreme value theory: free max-convolution, the free Gumbel, Fréchet
and Weibull laws, and Stein-type bounds on the Kolmogorov distance."""
from .distributions import (CLASSICAL, FREE, FRECHET, GUMBEL, WEIBULL, Cdf, ExtremeValueLaw,
                            TabulatedCdf, classical_law, eval_cdf, free_law, make_law, quantile,
                            tabulate, uniform)
from .errors import (DomainError, FreeEVTError, HypothesisViolation, NumericError, ParseError,
                     QuadratureError)
from .families import (WorkedFamily, frechet_family, generic_family, gumbel_family,
                       weibull_family, worked_family)
from .maxconv import (NormingSequence, classical_max_power, free_max_conv_pair, free_max_power,
                      norming_constants, renormalize, support_left_edge)
from .metrics import ConvergenceRow, affine_invariance_check, convergence_table, kolmogorov_distance
from .numerics import Interval, Tolerance, differentiate, find_root, integrate, one_sided_limit
from .stein import (BoundReport, DensityProfile, SteinSolution, apply_density_operator,
                    apply_stein_operator, eta_boundary_bound, eta_boundary_numeric,
                    gamma_functional, profile_decomposition_bound, remainder_term, stein_bound,
                    validate_density_profile)

__version__ = "0.1.0"
