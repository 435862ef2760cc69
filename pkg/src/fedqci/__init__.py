"""Planning toolkit for federated QKD network interconnections."""
from .errors import (
    DimensionMismatch,
    FedQCIError,
    Infeasible,
    InfeasibleInput,
    Overcommitted,
    Unbounded,
    UnknownEndpoint,
    WrongLinkKind,
)
from .feasibility import (
    SurvivabilityEntry,
    check_use_case,
    connected_components,
    critical_elements,
    network_diagnostics,
    survivability_report,
)
from .planner import DesignProblem, DesignSolution, budget_distribution, formulate, solve
from .report import emit_dot
from .satellite import Pass, SatelliteConfig, SatRequest, SatSchedule, effective_feed_capacity, schedule_passes
from .scenario_io import ScenarioError, load_fixture, parse_scenario, serialize_scenario
from .topology import (
    Country,
    GroundStationCandidate,
    Link,
    NetworkTopology,
    Node,
    Percentage,
    PointToPoint,
    UseCase,
    admissible_subgraph,
    great_circle_km,
    validate_topology,
)
from .vnet import VNetAllocation, allocate_vnets, enforcement_check

__version__ = "0.1.0"
