"""Executable single-source-of-truth analysis for multiply-encoded facts."""

from .bounds import (
    UNBOUNDED,
    FanoQuery,
    amortized_cost,
    binary_entropy,
    confusability_required_bits,
    error_compounding,
    fano_min_error,
    fano_required_info,
    rate_incoherence,
    regime_report,
    side_info_requirement,
)
from .dof import (
    UNDEFINED,
    DofReport,
    Regime,
    compute_dof,
    is_capacity_achieving,
    lattice_join,
    lattice_meet,
    minimal_dof1_extension,
    transitive_closure,
)
from .model import (
    Capabilities,
    Classification,
    DerivationGraph,
    EditEvent,
    Fact,
    Location,
    SystemState,
    apply_edit,
    classify_capabilities,
    is_coherent,
    language_table,
)
from .scan import scan_directory
from .simulate import (
    SideInfo,
    SideInfoKind,
    Trajectory,
    Witness,
    cap_check,
    construct_incoherence_witness,
    oracle_dissent,
    resolve_with_side_info,
    run_edit_sequence,
)
from .specio import SystemSpec, parse_script, parse_spec, serialize_script, serialize_spec

__version__ = "0.1.0"
