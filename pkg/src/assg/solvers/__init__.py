from .assg import (
    SOLVERS,
    assg_c,
    assg_c_global,
    assg_r,
    prox_assg_c,
    prox_assg_r,
    rassg,
    resolve_schedule,
)
from .config import AssgConfig, RunResult, StageRecord
from .inner import InnerTrace, inner_ball_ssg, prox_inner, prox_ssgs, ssg, ssgs
from .schedules import (
    compute_stage_count,
    compute_t_assg_c,
    compute_t_assg_r,
    compute_t_global,
    compute_t_prox_assg,
    derive_beta1,
    derive_D1,
    desk_scale,
    global_region,
    rassg_growth,
    rassg_restarts,
)

__all__ = [
    "SOLVERS", "AssgConfig", "InnerTrace", "RunResult", "StageRecord", "assg_c",
    "assg_c_global", "assg_r", "compute_stage_count", "compute_t_assg_c",
    "compute_t_assg_r", "compute_t_global", "compute_t_prox_assg", "derive_D1",
    "derive_beta1", "desk_scale", "global_region", "inner_ball_ssg", "prox_assg_c",
    "prox_assg_r", "prox_inner", "prox_ssgs", "rassg", "rassg_growth", "rassg_restarts",
    "resolve_schedule", "ssg", "ssgs",
]
