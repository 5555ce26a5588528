"""Episode sampling, prototype heads and losses."""
from teg.episodes.dump import dump_episodes, episode_record
from teg.episodes.losses import (
    class_log_probs,
    class_probs,
    combine_losses,
    episode_predictions,
    loss_graph,
    loss_task,
    predict,
    prototypes,
    total_loss,
)
from teg.episodes.tasks import EpisodeConfig, MetaTask, sample_task

__all__ = [
    "EpisodeConfig",
    "MetaTask",
    "class_log_probs",
    "class_probs",
    "combine_losses",
    "dump_episodes",
    "episode_predictions",
    "episode_record",
    "loss_graph",
    "loss_task",
    "predict",
    "prototypes",
    "sample_task",
    "total_loss",
]
