"""certcap: precision-certified capacity of band-limited colored-noise channels.

Everything is built on exact dyadic arithmetic: a result at precision M is a
dyadic rational guaranteed to lie within 2**-M of the true value.  The stack,
bottom up: `dyadic` (exact binary rationals), `creal` (computable reals as
approximation processes), `rigorlog` (error-bounded Taylor logarithms on a
bracket), `elementary` (certified pi/sin/cos/exp/sqrt), `cfunc`/`parse`
(certified functions with moduli of continuity and range witnesses),
`rigorint` (validated quadrature), `waterfill` (water levels, capacity,
discretized approximations), `profiling` (work-vs-precision measurement),
and `cli`.

Hot numeric loops run on a compiled kernel backend when available; set
CERTCAP_PURE=1 to force the pure-Python fallback (bit-identical results).
"""

from ._kernels import BACKEND as kernel_backend
from .cfunc import (CATALOG, CertifyStatus, CFunc, ModulusFn, catalog_noise,
                    certify_bounds, ln_compose, pos_part_of_level_minus)
from .creal import Comparison, CReal, PositiveWitness, compare_with_gap, cr_ln
from .dyadic import Dyadic
from .errors import (BudgetExceededError, CertcapError, ContractError,
                     DegenerateGrowthError, ParseError, PositivityError)
from .parse import parse_expression
from .profiling import emit_report, fit_growth, load_report, sweep_precision
from .rigorint import integrate, integrate_modulus, integrate_smooth
from .rigorlog import LogWindow, ln_rational, log_compose, make_log_window, taylor_log_poly
from .waterfill import (CapacityResult, ChannelSpec, Regime, WaterLevel,
                        capacity, convergence_study, discretized_capacity,
                        psd_at, water_level_closed, water_level_general)
from .work import WorkCounter, WorkReport

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "CapacityResult", "CertifyStatus", "CFunc",
    "ChannelSpec", "Comparison", "CReal", "Dyadic", "LogWindow", "ModulusFn",
    "PositiveWitness", "Regime", "WaterLevel", "WorkCounter", "WorkReport",
    "capacity", "catalog_noise", "certify_bounds", "compare_with_gap",
    "convergence_study", "cr_ln", "discretized_capacity", "emit_report",
    "fit_growth", "integrate", "integrate_modulus", "integrate_smooth",
    "kernel_backend", "ln_compose", "ln_rational", "load_report",
    "log_compose", "make_log_window", "parse_expression",
    "pos_part_of_level_minus", "psd_at", "sweep_precision",
    "taylor_log_poly", "water_level_closed", "water_level_general",
    "BudgetExceededError", "CertcapError", "ContractError",
    "DegenerateGrowthError", "ParseError", "PositivityError",
]
