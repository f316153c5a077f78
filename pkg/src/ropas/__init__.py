"""Modeling, solving, and simulating reconfigurable software systems.

The package covers the whole pipeline: declaring a problem/solution-space
model, checking goal-graph requirements, optimizing over specifications,
reformulating decision problems under uncertainty, and replaying event traces
through an adaptation simulator.
"""

from .domains import Boolean, Enumerated, IntegerRange, RealGrid
from .errors import DefinitionError, EvaluationError, RopasError, SizeLimitError
from .goals import (
    GoalGraph,
    check_drp,
    derive_closure,
    goal_graph,
    solve_rdrp,
    solve_rp2,
    solve_rp3,
)
from .model import (
    Criterion,
    Model,
    MonitoredVariable,
    Parameter,
    ProblemInstance,
    Specification,
    enumerate_specifications,
    evaluate,
    is_feasible,
    validate_model,
)
from .solver import (
    Infeasible,
    OptimalSolutions,
    Rop,
    brute_force_oracle,
    classify,
    decode_selection,
    encode_rdrp,
    rop,
    solve_rop,
)
from .decisions import (
    DecisionModel,
    daop_to_rop,
    expected_utility,
    rank_alternatives,
)
from .runtime import (
    AwarenessTrigger,
    Event,
    EventTrace,
    Metrics,
    SimulationConfig,
    SimulationTimeline,
    adaptation_candidates,
    run_simulation,
    select_adaptation,
)

__version__ = "0.1.0"

__all__ = [
    "Boolean",
    "Enumerated",
    "IntegerRange",
    "RealGrid",
    "DefinitionError",
    "EvaluationError",
    "RopasError",
    "SizeLimitError",
    "GoalGraph",
    "check_drp",
    "derive_closure",
    "goal_graph",
    "solve_rdrp",
    "solve_rp2",
    "solve_rp3",
    "Criterion",
    "Model",
    "MonitoredVariable",
    "Parameter",
    "ProblemInstance",
    "Specification",
    "enumerate_specifications",
    "evaluate",
    "is_feasible",
    "validate_model",
    "Infeasible",
    "OptimalSolutions",
    "Rop",
    "brute_force_oracle",
    "classify",
    "decode_selection",
    "encode_rdrp",
    "rop",
    "solve_rop",
    "DecisionModel",
    "daop_to_rop",
    "expected_utility",
    "rank_alternatives",
    "AwarenessTrigger",
    "Event",
    "EventTrace",
    "Metrics",
    "SimulationConfig",
    "SimulationTimeline",
    "adaptation_candidates",
    "run_simulation",
    "select_adaptation",
    "__version__",
]
