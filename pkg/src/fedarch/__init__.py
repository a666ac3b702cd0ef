"""fedarch: pattern decision models for federated-learning architectures,
plus a deterministic desk-scale simulator that measures the tradeoffs the
models claim."""

__version__ = "0.1.0"

from .catalog import (
    PatternCatalog,
    edges_of,
    load_catalog,
    load_default_catalog,
    query_pattern,
    validate_catalog,
)
from .config import SimConfig, SimMetrics
from .engine import (
    RequirementProfile,
    check_case_study,
    combined_effects,
    explain,
    is_feasible,
    recommend,
    render_adr,
    score_selection,
    what_if,
)
from .hypotheses import load_default_hypotheses, load_hypotheses
from .simulator import run_simulation
from .validator import evaluate_hypothesis, run_ab_experiment, validate_all

__all__ = [
    "PatternCatalog",
    "RequirementProfile",
    "SimConfig",
    "SimMetrics",
    "check_case_study",
    "combined_effects",
    "edges_of",
    "evaluate_hypothesis",
    "explain",
    "is_feasible",
    "load_catalog",
    "load_default_catalog",
    "load_default_hypotheses",
    "load_hypotheses",
    "query_pattern",
    "recommend",
    "render_adr",
    "run_ab_experiment",
    "run_simulation",
    "score_selection",
    "validate_all",
    "validate_catalog",
    "what_if",
    "__version__",
]
