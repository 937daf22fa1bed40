"""
性能度量：空间、时间与工作量
"""

from analysis.perf.branching import (
    CharMatrix,
    Subcriticality,
    WorkResult,
    characteristic_matrix,
    expected_work_bp,
    is_subcritical,
    reduce_bp,
    spectral_radius_estimate,
)
from analysis.perf.distributions import (
    Pmf,
    TailExpectation,
    pmf_from_table,
    tail_expectation,
    time_distribution,
    time_table,
    work_distribution,
    work_table,
)
from analysis.perf.exact_lp import phase_one_feasible
from analysis.perf.measures import (
    FINITE,
    INFINITE,
    Finiteness,
    PsjsWork,
    SpaceResult,
    conditional_expected_work,
    expected_time,
    expected_work_psjs,
    finiteness,
    space_probability,
)

__all__ = [
    "CharMatrix",
    "Subcriticality",
    "WorkResult",
    "characteristic_matrix",
    "expected_work_bp",
    "is_subcritical",
    "reduce_bp",
    "spectral_radius_estimate",
    "Pmf",
    "TailExpectation",
    "pmf_from_table",
    "tail_expectation",
    "time_distribution",
    "time_table",
    "work_distribution",
    "work_table",
    "phase_one_feasible",
    "FINITE",
    "INFINITE",
    "Finiteness",
    "PsjsWork",
    "SpaceResult",
    "conditional_expected_work",
    "expected_time",
    "expected_work_psjs",
    "finiteness",
    "space_probability",
]
