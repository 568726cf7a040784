"""Priority-tree simulator for building r.e. sets with a prescribed Turing-reducibility preorder."""
from .audit import (AuditReport, audit_markers, believability_profile, decode_check,
                    diagonalization_counts, replay_delta, surviving_tops)
from .construction import Believability, InternalError, RunResult, Simulator, believable, run
from .scenario import Scenario, ScenarioError, generate_scenario, random_preorder
from .tree import INF, ZERO, Label, Tree, node_code, unpair4

__all__ = [
    "AuditReport", "audit_markers", "believability_profile", "decode_check",
    "diagonalization_counts", "replay_delta", "surviving_tops",
    "Believability", "InternalError", "RunResult", "Simulator", "believable", "run",
    "Scenario", "ScenarioError", "generate_scenario", "random_preorder",
    "INF", "ZERO", "Label", "Tree", "node_code", "unpair4",
]
