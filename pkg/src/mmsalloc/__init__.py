"""Maximin-share fair division of indivisible goods with exact rationals."""

from .core import (Allocation, FairnessReport, Instance, check_ef, check_ef1, check_efx, fairness_report,
                   is_ordered, order_instance, proportionality_bound, scale, to_rational, unorder_allocation,
                   value)
from .oracle import (BudgetExceeded, MmsResult, OptimalMmsResult, alpha_beta_check, count_mms_satisfied, mms,
                     mms_exceeds, optimal_mms)
from .reduce import NormalizationTrace, lift_allocation, normalize, strong_normalize, valid_reduction_step
from .approx import (PipelineResult, envy_graph_efx, general_n_beta, half_agents_pipeline, mms_k_via_dummies,
                     n_minus_one_pipeline, round_robin, two_agent_mms3)
from .lone_divider import (divider_partition_existence, divider_partition_poly, envy_free_matching,
                           extended_experiment_algorithm, two_thirds_existence_engine, two_thirds_poly)
from .adversarial import (SparseTensor, equi_partition_search, fixed_instance, optimal_mms_counterexample,
                          perturbation_P, tensor_S, tensor_T)
from .bench import ExperimentRecord, export_csv, gen_uniform_instance, run_experiment

__all__ = [
    "Allocation", "FairnessReport", "Instance", "check_ef", "check_ef1", "check_efx", "fairness_report",
    "is_ordered", "order_instance", "proportionality_bound", "scale", "to_rational", "unorder_allocation",
    "value", "BudgetExceeded", "MmsResult", "OptimalMmsResult", "alpha_beta_check", "count_mms_satisfied",
    "mms", "mms_exceeds", "optimal_mms", "NormalizationTrace", "lift_allocation", "normalize",
    "strong_normalize", "valid_reduction_step", "PipelineResult", "envy_graph_efx", "general_n_beta",
    "half_agents_pipeline", "mms_k_via_dummies", "n_minus_one_pipeline", "round_robin", "two_agent_mms3",
    "divider_partition_existence", "divider_partition_poly", "envy_free_matching",
    "extended_experiment_algorithm", "two_thirds_existence_engine", "two_thirds_poly", "SparseTensor",
    "equi_partition_search", "fixed_instance", "optimal_mms_counterexample", "perturbation_P", "tensor_S",
    "tensor_T", "ExperimentRecord", "export_csv", "gen_uniform_instance", "run_experiment"
]

__version__ = "0.1.0"
