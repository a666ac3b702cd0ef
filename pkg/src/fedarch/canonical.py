"""Frozen census of the canonical catalog content.

This is a second, code-side copy of every edge the shipped catalog.json must
contain. `validate_catalog` compares a catalog against it whenever the
catalog declares `canonical_content: true`, so an accidental edit to either
side is caught by the other.

Tuples are (decision_model, pattern, attribute, direction) for effects,
(decision_model, kind, from_pattern, to_pattern, scope_attribute) for
relations and (decision_model, pattern, constraint_key) for constraints.
"""

from __future__ import annotations

CANONICAL_PATTERN_COUNT = 15

CANONICAL_MODEL_MEMBERS = {
    "client_management": frozenset(
        {"client_registry", "client_selector", "client_cluster"}),
    "model_management_configuration": frozenset(
        {"message_compressor", "model_co_versioning_registry", "model_replacement_trigger",
         "deployment_selector", "training_configurator"}),
    "model_aggregation": frozenset(
        {"asynchronous_aggregator", "decentralised_aggregator", "hierarchical_aggregator",
         "secure_aggregator"}),
    "model_training": frozenset(
        {"multi_task_model_trainer", "heterogeneous_data_handler", "incentive_registry"}),
}

CANONICAL_CATEGORY_OF = {
    "client_registry": "client_management",
    "client_selector": "client_management",
    "client_cluster": "client_management",
    "message_compressor": "model_management",
    "model_co_versioning_registry": "model_management",
    "model_replacement_trigger": "model_management",
    "deployment_selector": "model_management",
    "multi_task_model_trainer": "model_training",
    "heterogeneous_data_handler": "model_training",
    "incentive_registry": "model_training",
    "asynchronous_aggregator": "model_aggregation",
    "decentralised_aggregator": "model_aggregation",
    "hierarchical_aggregator": "model_aggregation",
    "secure_aggregator": "model_aggregation",
    "training_configurator": "configuration",
}

CANONICAL_EFFECTS = (
    ("client_management", "client_registry", "maintainability", "benefit"),
    ("client_management", "client_registry", "reliability", "benefit"),
    ("client_management", "client_registry", "traceability", "benefit"),
    ("client_management", "client_registry", "data_privacy", "tradeoff"),
    ("client_management", "client_selector", "training_efficiency", "benefit"),
    ("client_management", "client_selector", "model_quality", "tradeoff"),
    ("client_management", "client_cluster", "training_efficiency", "benefit"),
    ("client_management", "client_cluster", "computation_efficiency", "tradeoff"),
    ("model_management_configuration", "message_compressor", "communication_efficiency", "benefit"),
    ("model_management_configuration", "message_compressor", "model_quality", "tradeoff"),
    ("model_management_configuration", "model_co_versioning_registry", "accountability", "benefit"),
    ("model_management_configuration", "model_co_versioning_registry", "traceability", "benefit"),
    ("model_management_configuration", "model_co_versioning_registry", "storage_cost_efficiency", "tradeoff"),
    ("model_management_configuration", "model_co_versioning_registry", "data_privacy", "tradeoff"),
    ("model_management_configuration", "model_co_versioning_registry", "computation_efficiency", "tradeoff"),
    ("model_management_configuration", "model_co_versioning_registry", "reliability", "tradeoff"),
    ("model_management_configuration", "model_replacement_trigger", "upgradability", "benefit"),
    ("model_management_configuration", "model_replacement_trigger", "reliability", "benefit"),
    ("model_management_configuration", "model_replacement_trigger", "computation_efficiency", "tradeoff"),
    ("model_management_configuration", "deployment_selector", "model_suitability", "benefit"),
    ("model_management_configuration", "deployment_selector", "ease_of_deployment", "benefit"),
    ("model_management_configuration", "deployment_selector", "data_privacy", "tradeoff"),
    ("model_management_configuration", "deployment_selector", "computation_efficiency", "tradeoff"),
    ("model_management_configuration", "training_configurator", "usability", "benefit"),
    ("model_management_configuration", "training_configurator", "accessibility", "benefit"),
    ("model_management_configuration", "training_configurator", "computation_efficiency", "benefit"),
    ("model_management_configuration", "training_configurator", "flexibility", "tradeoff"),
    ("model_management_configuration", "training_configurator", "scalability", "tradeoff"),
    ("model_aggregation", "asynchronous_aggregator", "latency_reduction", "benefit"),
    ("model_aggregation", "asynchronous_aggregator", "computation_efficiency", "benefit"),
    ("model_aggregation", "asynchronous_aggregator", "communication_efficiency", "tradeoff"),
    ("model_aggregation", "asynchronous_aggregator", "model_quality", "tradeoff"),
    ("model_aggregation", "hierarchical_aggregator", "statistical_heterogeneity_handling", "benefit"),
    ("model_aggregation", "hierarchical_aggregator", "system_heterogeneity_handling", "benefit"),
    ("model_aggregation", "hierarchical_aggregator", "scalability", "benefit"),
    ("model_aggregation", "hierarchical_aggregator", "reliability", "tradeoff"),
    ("model_aggregation", "hierarchical_aggregator", "security", "tradeoff"),
    ("model_aggregation", "hierarchical_aggregator", "cost_efficiency", "tradeoff"),
    ("model_aggregation", "secure_aggregator", "security", "benefit"),
    ("model_aggregation", "secure_aggregator", "data_privacy", "benefit"),
    ("model_aggregation", "secure_aggregator", "model_quality", "tradeoff"),
    ("model_aggregation", "secure_aggregator", "computation_efficiency", "tradeoff"),
    ("model_aggregation", "secure_aggregator", "latency_reduction", "tradeoff"),
    ("model_aggregation", "decentralised_aggregator", "reliability", "benefit"),
    ("model_aggregation", "decentralised_aggregator", "accountability", "benefit"),
    ("model_aggregation", "decentralised_aggregator", "latency_reduction", "tradeoff"),
    ("model_aggregation", "decentralised_aggregator", "storage_cost_efficiency", "tradeoff"),
    ("model_training", "heterogeneous_data_handler", "statistical_heterogeneity_handling", "benefit"),
    ("model_training", "heterogeneous_data_handler", "model_quality", "benefit"),
    ("model_training", "incentive_registry", "client_motivatability", "benefit"),
    ("model_training", "incentive_registry", "model_quality", "benefit"),
    ("model_training", "incentive_registry", "system_fairness", "benefit"),
    ("model_training", "incentive_registry", "security", "tradeoff"),
    ("model_training", "multi_task_model_trainer", "model_quality", "benefit"),
    ("model_training", "multi_task_model_trainer", "robustness", "benefit"),
    ("model_training", "multi_task_model_trainer", "training_efficiency", "benefit"),
    ("model_training", "multi_task_model_trainer", "data_privacy", "tradeoff"),
)

CANONICAL_RELATIONS = (
    ("client_management", "complements", "client_selector", "client_registry", None),
    ("client_management", "complements", "client_cluster", "client_registry", None),
    ("client_management", "alternative", "client_selector", "client_cluster", None),
    ("model_management_configuration", "complements", "model_co_versioning_registry",
     "training_configurator", None),
    ("model_management_configuration", "complements", "model_replacement_trigger",
     "training_configurator", None),
    ("model_management_configuration", "complements", "deployment_selector",
     "training_configurator", None),
    ("model_training", "alternative", "heterogeneous_data_handler", "incentive_registry",
     "reliability"),
)

CANONICAL_CONSTRAINTS = (
    ("client_management", "client_registry", "requires_owner_consent"),
    ("model_aggregation", "hierarchical_aggregator", "requires_extra_edge_devices"),
    ("model_aggregation", "decentralised_aggregator", "accepts_decentralisation_cost"),
    ("model_training", "multi_task_model_trainer", "requires_cross_app_metadata"),
)

CANONICAL_CASE_STUDIES = {
    "meta": frozenset(
        {"secure_aggregator", "training_configurator", "heterogeneous_data_handler",
         "client_registry", "model_co_versioning_registry"}),
    "intel_openfl": frozenset(
        {"multi_task_model_trainer", "secure_aggregator", "training_configurator",
         "deployment_selector"}),
    "siemens_ifl": frozenset(
        {"multi_task_model_trainer", "client_registry", "training_configurator",
         "client_selector", "asynchronous_aggregator", "model_co_versioning_registry",
         "deployment_selector"}),
}
