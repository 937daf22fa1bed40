"""
案例研究：分治积分、博弈树求值以及测试和命令行共用的模型族
"""

from analysis.casestudies.divcon import DivConParams, gen_divcon, split_weight
from analysis.casestudies.families import (
    EX1_TEXT,
    as_probability,
    doubler,
    doubler_psjs,
    ex1,
    random_model,
    random_ppds,
    random_walk_ppds,
    swapped_doubler,
)
from analysis.casestudies.gametree import (
    CONDITION_STATE,
    VARIANTS,
    GameTreeParams,
    gen_gametree,
    leaf_weights,
    ominus,
    oplus,
)
from analysis.casestudies.runner import (
    STUDIES,
    CaseStudyTable,
    DivConRow,
    GameTreeRow,
    PointMeasures,
    parse_sweep,
    run_case_study,
)

__all__ = [
    "DivConParams",
    "gen_divcon",
    "split_weight",
    "EX1_TEXT",
    "as_probability",
    "doubler",
    "doubler_psjs",
    "ex1",
    "random_model",
    "random_ppds",
    "random_walk_ppds",
    "swapped_doubler",
    "CONDITION_STATE",
    "VARIANTS",
    "GameTreeParams",
    "gen_gametree",
    "leaf_weights",
    "ominus",
    "oplus",
    "STUDIES",
    "CaseStudyTable",
    "DivConRow",
    "GameTreeRow",
    "PointMeasures",
    "parse_sweep",
    "run_case_study",
]
