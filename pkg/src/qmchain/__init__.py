"""Chains of consecutive projective measurements on a single qubit.

Core pieces: density-matrix primitives (``linalg``), the unitary and
collapse measurement-chain engines (``chain``), entropy accounting
(``info``), an interference-based tomography emulator (``optics``,
``tomography``), sweep drivers (``sweeps``), and an HTTP service plus CLI
on top.
"""

__version__ = "0.1.0"

from .linalg import (
    CLOSED_FORM_ATOL,
    IDENTITY,
    SIGMA_Z,
    DensityMatrix,
    ValidationReport,
    dephase,
    kron,
    matrices_close,
    partial_trace,
    purify,
    purity,
    validate,
    von_neumann_entropy,
)
from .chain import (
    ChainConfig,
    ChainResult,
    MeasurementSpec,
    Model,
    collapse_chain,
    orthogonal_sequence_config,
    prepare_diagonal_state,
    prepare_nondiagonal_state,
    purity_collapse_closed_form,
    purity_unitary_closed_form,
    rotate_state,
    rotation_matrix,
    run_chain,
    unitary_chain,
)
from .info import VennReport, conditional_entropy, mutual_information, venn
from .optics import (
    FringePattern,
    NoiseParams,
    OpticalState,
    PathGeometry,
    add_noise,
    apply_beam_displacer,
    block_paths,
    build_geometry,
    dft_extract,
    initial_optical_state,
    optical_joint_states,
    run_displacer_sequence,
    spinning_hwp_state,
    synthesize_fringes,
)
from .tomography import (
    AxisPlan,
    AxisPlanEntry,
    ReconstructionResult,
    default_axis_plan,
    reconstruct,
    replicate_average,
)
from .sweeps import (
    SweepPoint,
    SweepRow,
    SweepSpec,
    run_engine_sweep,
    run_reconstruction_sweep,
    sweep_rows_to_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
