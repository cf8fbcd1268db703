"""Exact, fuel-bounded workbench for Solovay reducibility of left-c.e. reals.

Rational and real translation functions, finite-depth checkers that can
only falsify, the constructions moving between witness kinds, transport of
Solovay tests, and the conversion of rational witnesses into Lipschitz real
ones.
"""

from .kernel import (
    Budget,
    ConstantApprox,
    ConstructionError,
    EffectiveApprox,
    FuelExhausted,
    Interval,
    LeftCEApprox,
    MachineUndefined,
    Meter,
    PreconditionError,
    Rational,
    WorkbenchError,
    canonical_rationals,
    dyadic_rationals,
    geometric_leftce,
    limit_bound,
    validate_effective,
)
from .type2 import Status, ToleranceResult, evaluate, max_on_compact, monotonize_max, query_with_tolerance
from .witnesses import (
    CheckReport,
    QWitness,
    RealName,
    RWitness,
    Verdict,
    check_left_of_limit,
    check_lipschitz_Q,
    check_monotone,
    check_R_witness,
    check_solovay_condition,
    convergence_diagnostic,
    make_constant_witness,
)
from .constructions import (
    PairedApproximations,
    build_prop4_instance,
    interp_Q_witness,
    leftce_from_R,
    leftce_from_monotone,
    monotone_from_leftce,
    piecewise_linear_R,
)
from .pipeline import (
    Pipeline,
    PipelineConfig,
    check_claims,
    f_two_arg,
    ftilde_two_arg,
    gtilde,
    h_machine,
    search_P,
)
from .randomness import (
    SolovayTest,
    TransformedTest,
    check_fails_on,
    tolerance_query_g,
    transform_test,
    transform_total_test,
)
from .scenario import Report, emit_csv, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "ConstantApprox",
    "ConstructionError",
    "EffectiveApprox",
    "FuelExhausted",
    "Interval",
    "LeftCEApprox",
    "MachineUndefined",
    "Meter",
    "PreconditionError",
    "Rational",
    "WorkbenchError",
    "canonical_rationals",
    "dyadic_rationals",
    "geometric_leftce",
    "limit_bound",
    "validate_effective",
    "Status",
    "ToleranceResult",
    "evaluate",
    "max_on_compact",
    "monotonize_max",
    "query_with_tolerance",
    "CheckReport",
    "QWitness",
    "RealName",
    "RWitness",
    "Verdict",
    "check_left_of_limit",
    "check_lipschitz_Q",
    "check_monotone",
    "check_R_witness",
    "check_solovay_condition",
    "convergence_diagnostic",
    "make_constant_witness",
    "PairedApproximations",
    "build_prop4_instance",
    "interp_Q_witness",
    "leftce_from_R",
    "leftce_from_monotone",
    "monotone_from_leftce",
    "piecewise_linear_R",
    "Pipeline",
    "PipelineConfig",
    "check_claims",
    "f_two_arg",
    "ftilde_two_arg",
    "gtilde",
    "h_machine",
    "search_P",
    "SolovayTest",
    "TransformedTest",
    "check_fails_on",
    "tolerance_query_g",
    "transform_test",
    "transform_total_test",
    "Report",
    "emit_csv",
    "run_scenario",
]
