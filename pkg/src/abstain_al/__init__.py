"""Active learning with an abstain option: fixed-cost and bounded-rate learners on dyadic trees."""

from .adaptive import run_adaptive
from .algo_fixed_cost import ActiveState, run_algorithm1
from .algo_known_marginal import run_algorithm2
from .algo_unlabelled import run_algorithm3
from .classifier import ABSTAIN, LABEL0, LABEL1, AbstainClassifier
from .errors import (AbstainError, BudgetExhausted, DegenerateConfig, InsufficientBudget,
                     InvalidConfig, NoData, OutOfDomain, UnsupportedModel)
from .estimation import CellStats, SmoothnessParams, confidence_radius
from .evaluation import (RiskReport, bayes_fixed_cost, fit_rate, gamma_delta, passive_plugin,
                         risk_of)
from .glm import dimension_coupling, estimate_angle_2d, recover_direction, sample_complexity
from .oracles import make_oracle, request_label
from .partition_tree import Cell, TreeParams, default_params, refine, root_cell
from .problems import (ProblemInstance, instance_from_spec, make_glm_instance, make_holder_instance,
                       make_linear_1d, make_lower_bound_instance)

__version__ = "0.1.0"
