"""Type-II quadrature PT-symmetric twin beams: closed-form observables, oracles and sweeps."""

__version__ = "0.1.0"

from .errors import QptError, SingularLength, SpecError  # noqa: E402
from .params import PtParams, PtPhase, make_params, params_from_b, period_T  # noqa: E402
from .propagator import QuadPair, TransferMatrix2, check_commutators, transfer  # noqa: E402

__all__ = [
    "PtParams",
    "PtPhase",
    "QptError",
    "QuadPair",
    "SingularLength",
    "SpecError",
    "TransferMatrix2",
    "__version__",
    "check_commutators",
    "make_params",
    "params_from_b",
    "period_T",
    "transfer",
]
