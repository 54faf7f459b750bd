"""Probabilistic cascading-failure analysis for interdependent lifeline
networks.

Networks are directed source-to-target flow graphs whose topology can
switch between prioritized configurations over time.  Failure risk
propagates along supply chains (functional failure), across
inter-network dependency edges, and through each node's own fragility
and autonomy behavior.  A classic inoperability (input-output) solver
and small fault-tree / event-tree evaluators are included for
cross-checking.
"""

from .errors import (
    ConvergenceError,
    CurveError,
    LifelineError,
    MissingCurveError,
    ModelError,
    ScenarioParseError,
    SolvabilityError,
    StructuralMismatchError,
)
from .model import (
    Configuration,
    InterNetworkDependency,
    Network,
    Node,
    SystemModel,
    validate_topology,
)
from .hazards import (
    AutonomyCurve,
    CurveLibrary,
    EventVector,
    FragilityCurve,
    autonomy_increment,
    combine_independent,
    eval_fragility,
    joint_redundant_failure,
    self_failure,
)
from .classic import (
    couple_layers_classic,
    damage_vector,
    damage_vector_sp,
    decay_score,
    sp_vector,
    spectral_radius,
    system_score,
)
from .cascade import (
    ExternalInput,
    LayerState,
    NetworkState,
    NodeProbabilities,
    SystemState,
    configuration_occurrence,
    couple_layers_prob,
    layer_survival,
    node_importance,
    propagate_layer,
    solve_system,
)
from .pra import (
    BasicEvent,
    Branch,
    EventTree,
    FaultTree,
    Gate,
    Sequence,
    eval_event_tree,
    eval_fault_tree,
    iim_eta_equivalence,
    iim_or_equivalence,
    node_from,
    or_reference_network,
)
from .engine import (
    Intervention,
    ProbabilityReport,
    Timeline,
    combine_reports,
    importance_series,
    run_ensemble,
    run_timeline,
)
from .scenario import (
    ScenarioDocument,
    bundled_scenario_names,
    export_report,
    import_report_dict,
    list_scenarios,
    parse_scenario,
    report_rows,
    report_to_json_dict,
    resolve_scenario,
)

__version__ = "0.1.0"
