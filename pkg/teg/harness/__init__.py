"""Training, evaluation, audits, sweeps and result files."""
from teg.harness.audit import (
    AuditReport,
    TransformSpec,
    equivariance_audit,
    identity_transform,
    make_transform,
    make_transforms,
    noise_sweep,
)
from teg.harness.diversity import SweepPoint, diversity_grid, run_experiment, sensitivity_sweep, way_sweep
from teg.harness.evaluation import EvalReport, evaluate, sample_eval_tasks
from teg.harness.model import RunContext, TegModel, episode_cost, init_model, prepare_run, toy_gradient_problem
from teg.harness.run_config import (
    RunConfig,
    RunConfigError,
    config_hash,
    dump_run_config,
    load_run_config,
    parse_run_config,
    with_overrides,
)
from teg.harness.trainer import TrainResult, train

__all__ = [
    "AuditReport",
    "EvalReport",
    "RunConfig",
    "RunConfigError",
    "RunContext",
    "SweepPoint",
    "TegModel",
    "TrainResult",
    "TransformSpec",
    "config_hash",
    "diversity_grid",
    "dump_run_config",
    "episode_cost",
    "equivariance_audit",
    "evaluate",
    "identity_transform",
    "init_model",
    "load_run_config",
    "make_transform",
    "make_transforms",
    "noise_sweep",
    "parse_run_config",
    "prepare_run",
    "run_experiment",
    "sample_eval_tasks",
    "sensitivity_sweep",
    "toy_gradient_problem",
    "train",
    "way_sweep",
    "with_overrides",
]
