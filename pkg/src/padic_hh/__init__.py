"""Certified computations for Hardy-Hilbert type operators on p-adic
central Morrey and block spaces, restricted to radial functions."""

from .errors import *  # noqa: F401,F403
from .exact import (
    Comparison,
    Interval,
    Ordering,
    PPowerSum,
    arith,
    canonicalize,
    compare_certified,
    pow_rational,
    to_decimal,
)
from .operators import (
    ConstantResult,
    KernelSpec,
    SampledImage,
    admissible,
    apply_operator,
    constant_closed_form,
    constant_series,
    kernel_coefficient,
    kernel_value,
    transport_decompose,
)
from .padic import Prime, Shape, haar_measure, padic_norm, ultrametric_check, valuation
from .radial import RadialFunction, combine, dilate, evaluate_at, integrate, lr_norm_pow, multiply
from .records import Outcome, TheoremId, VerificationRecord
from .spaces import (
    Block,
    BlockDecomposition,
    CertifiedBound,
    SpaceParams,
    block_norm_bracket,
    block_norm_lower,
    block_norm_lower_dual,
    block_norm_upper,
    certify_block,
    holder_pairing_check,
    morrey_norm_pow,
    morrey_sup,
)
from .verify import SweepGrid, emit_report, run_sweep, verify_dilation, verify_transport

__version__ = "0.1.0"
