"""Multidimensional vector-valued Laplace transforms.

Forward transforms with convergence-region analysis, operational rules,
Post-Widder and Bromwich inversion, and transform-domain solvers for
fractional, Volterra and second-order problems with matrix coefficients.
"""

from .errors import (
    ConfigurationError,
    DecayViolationError,
    DivergenceError,
    DomainError,
    MDLTError,
    OverflowGuardError,
    QuadratureError,
    SeriesConvergenceError,
    SingularSystemError,
)
from .inversion import (
    AccuracyWarning,
    ContourConfig,
    Decay,
    PostWidderConfig,
    TransformFunction,
    bromwich_invert,
    bromwich_invert_many,
    post_widder_invert,
    post_widder_invert_G,
    tauberian_final,
    tauberian_initial,
    uniqueness_check,
)
from .registry import get_function, get_pair, get_transform
from .solvers import (
    FractionalProblem2D,
    InitialConditionSchedule,
    SecondOrderProblem,
    VolterraProblem,
    build_resolvent_second_order,
    initial_condition_schedule,
    solve_fractional_2d,
    solve_second_order,
    solve_volterra,
)
from .special import MLParams, WrightParams, gamma_kernel, mittag_leffler, wright
from .transform import (
    Envelope,
    LaplacePoint,
    QuadratureConfig,
    VectorFunction,
    antiderivative_G,
    check_LG_relation,
    classify_point,
    convergence_report,
    laplace_nd,
)

__version__ = "0.1.0"
