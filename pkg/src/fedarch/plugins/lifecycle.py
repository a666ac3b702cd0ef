"""Model replacement trigger and deployment selector."""

from __future__ import annotations

from dataclasses import dataclass

KEEP = "keep"
TRIGGER_RETRAIN = "trigger_retrain"


def evaluate_replacement_trigger(history: list[float], window: int,
                                 drop_threshold: float) -> str:
    """Fire when the moving-average accuracy falls `drop_threshold` below
    the best moving average seen so far. Fewer than `window` points: keep."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(history) < window:
        return KEEP
    averages = [sum(history[i - window + 1:i + 1]) / window
                for i in range(window - 1, len(history))]
    current = averages[-1]
    best = max(averages)
    return TRIGGER_RETRAIN if current < best - drop_threshold else KEEP


@dataclass(frozen=True)
class DeployableModel:
    model_id: str
    min_capability: float  # a device below this cannot run the model usefully
    accuracy: float


def device_capability(device_speed: float, memory: float, max_speed: float,
                      max_memory: float) -> float:
    """Normalised speed times memory rank, in (0, 1]."""
    return (device_speed / max_speed) * (memory / max_memory)


def match_deployment(models: list[DeployableModel],
                     capabilities: dict[int, float]) -> dict[int, str]:
    """Give each device the best-accuracy model it can actually run.

    Devices below every requirement get the lightest model. Deterministic:
    ties break on model id.
    """
    if not models:
        raise ValueError("need at least one deployable model")
    lightest = min(models, key=lambda m: (m.min_capability, m.model_id))
    assignment: dict[int, str] = {}
    for cid in sorted(capabilities):
        cap = capabilities[cid]
        runnable = [m for m in models if m.min_capability <= cap]
        if not runnable:
            assignment[cid] = lightest.model_id
        else:
            best = max(runnable, key=lambda m: (m.accuracy, m.model_id))
            assignment[cid] = best.model_id
    return assignment
