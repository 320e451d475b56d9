"""Instrumented in-process SUTs, branch probes and the simulated table store."""

from .probes import (
    BranchProbe,
    ProbeRegistry,
    normalize,
    numeric_branch_distances,
    probe_cmp_numeric,
    probe_cmp_string,
    string_branch_distances,
)
from .services import (
    HARNESS_BUILDERS,
    SimulatedService,
    build_authdemo,
    build_harness,
    build_ncs_analog,
    build_scs_analog,
    catalog,
)
from .store import ResetReport, SimTableStore

__all__ = [
    "BranchProbe", "HARNESS_BUILDERS", "ProbeRegistry", "ResetReport",
    "SimTableStore", "SimulatedService", "build_authdemo", "build_harness",
    "build_ncs_analog", "build_scs_analog", "catalog", "normalize",
    "numeric_branch_distances", "probe_cmp_numeric", "probe_cmp_string",
    "string_branch_distances",
]
