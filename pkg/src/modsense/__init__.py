"""Modular many-body quantum sensor simulations.

Free-fermion solvers for modular transverse-XY chains, ground-state quantum
Fisher information, transfer-matrix phase boundaries, finite-size scaling
collapse, global-sensing optimization, and modular SSH topological probes.
"""

__version__ = "0.1.0"

from .errors import ModsenseError, ValidationError, NumericalError, SizeError
from .xy_chain import (
    XYChainSpec,
    BdGMatrix,
    BogoliubovDecomposition,
    build_couplings,
    build_bdg_matrix,
    diagonalize_bdg,
    solve_chain,
    ground_state_energy,
    best_sector,
)
from .qfi import (
    QfiResult,
    onishi_overlap,
    qfi_finite_difference,
    qfi_trace_formula,
    qfi_scan,
)
from .ed import build_spin_hamiltonian, ed_ground_state, qfi_ed
from .phase_boundary import (
    TransferMatrixCell,
    PhaseBoundarySet,
    cell_transfer_matrix,
    find_critical_fields,
    phase_diagram_grid,
)
from .scaling import (
    ScalingDataset,
    ScalingFit,
    loglog_slope,
    collapse_cost,
    fit_collapse,
)
from .global_sensing import (
    GlobalSensingProblem,
    GlobalSensingResult,
    QfiCache,
    average_uncertainty,
    optimize_control_field,
    global_exponent,
)
from .ssh import (
    SSHChainSpec,
    BandStructure,
    WindingResult,
    build_bloch,
    band_structure,
    band_energies_closed,
    band_qfi,
    band_qfi_closed,
    closed_form_eigenvector,
    half_filling_qfi,
    winding_number,
    find_gap_closings,
)
from .sweep import SweepConfig, ResultTable, run_sweep
from .reporting import emit_csv, read_csv, emit_svg
