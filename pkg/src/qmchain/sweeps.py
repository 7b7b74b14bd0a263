"""Waveplate-angle sweeps: purity curves over the standard measurement grid.

The sweep walks the preparation waveplate angle xi and runs the three-stage
chain at phi = 2*xi per grid point. A noiseless sweep reports the engine's
exact record purity; a noisy sweep emulates the full tomography per
replicate and reports the reconstructed purity's mean and standard error.
The two closed-form reference curves are attached to every row so the
output is directly plottable against them.

Walk-off compensation: ``compensation[k]`` says whether the k-th crystal's
walk-off is compensated. An uncompensated crystal dephases its stage's
readout, which drives the record toward the collapse-model curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    ChainConfig,
    Model,
    orthogonal_sequence_config,
    purity_collapse_closed_form,
    purity_unitary_closed_form,
    run_chain,
)
from .linalg import DensityMatrix, purity
from .optics import NoiseParams, PathGeometry, build_geometry
from .tomography import (
    AxisPlan,
    ReconstructionResult,
    default_axis_plan,
    reconstruct,
    replicate_average,
)

DEFAULT_XI_START = 0.0
DEFAULT_XI_END = 22.5
DEFAULT_XI_STEP = 2.25
DEFAULT_REPLICATES = 5


@dataclass(frozen=True)
class SweepSpec:
    """Grid and acquisition settings for one sweep."""

    xi_start: float = DEFAULT_XI_START
    xi_end: float = DEFAULT_XI_END
    xi_step: float = DEFAULT_XI_STEP
    replicates: int = DEFAULT_REPLICATES
    noise: NoiseParams | None = None
    compensation: tuple[bool, bool, bool] = (True, True, True)
    # fewer replicates at the grid endpoints for fully compensated runs:
    # 4 at the first point and 2 at the last, the default count otherwise
    tapered_replicates: bool = False
    rotated_input: bool = True

    def __post_init__(self):
        if not (self.xi_step > 0):
            raise ValueError(f"xi_step must be positive, got {self.xi_step!r}")
        if self.xi_start > self.xi_end:
            raise ValueError("xi_start must not exceed xi_end")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if len(self.compensation) != 3:
            raise ValueError("compensation needs one boolean per crystal")

    def xi_grid(self) -> tuple[float, ...]:
        out = []
        k = 0
        while True:
            xi = self.xi_start + k * self.xi_step
            if xi > self.xi_end + 1e-9:
                break
            out.append(xi)
            k += 1
        return tuple(out)

    def dephase_stages(self) -> tuple[int, ...]:
        return tuple(k + 1 for k, ok in enumerate(self.compensation) if not ok)

    def replicates_at(self, xi: float) -> int:
        if self.tapered_replicates and all(self.compensation):
            if math.isclose(xi, self.xi_start):
                return min(self.replicates, 4)
            if math.isclose(xi, self.xi_end):
                return min(self.replicates, 2)
        return self.replicates

    def config_at(self, xi: float) -> ChainConfig:
        return orthogonal_sequence_config(
            math.radians(2.0 * xi),
            rotated_input=self.rotated_input,
            stages=3,
            dephase_stages=self.dephase_stages(),
        )


@dataclass(frozen=True)
class SweepRow:
    xi_deg: float
    phi_deg: float
    mean_purity: float
    std_error: float
    purity_unitary_model: float
    purity_collapse_model: float


SWEEP_CSV_HEADER = (
    "xi_deg,phi_deg,mean_purity,std_error,purity_unitary_model,purity_collapse_model"
)


def sweep_rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{float(r.xi_deg)!r},{float(r.phi_deg)!r},{float(r.mean_purity)!r},{float(r.std_error)!r},"
            f"{float(r.purity_unitary_model)!r},{float(r.purity_collapse_model)!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a reconstruction sweep."""

    xi_deg: float
    phi_deg: float
    truth: DensityMatrix
    replicates: tuple[ReconstructionResult, ...]
    mean_matrix: np.ndarray
    std_matrix: np.ndarray
    purities: tuple[float, ...] = field(default=())

    @property
    def mean_purity(self) -> float:
        return float(np.mean(self.purities))

    @property
    def std_error(self) -> float:
        if len(self.purities) < 2:
            return 0.0
        return float(np.std(self.purities, ddof=1) / math.sqrt(len(self.purities)))

    def row(self) -> SweepRow:
        phi = math.radians(self.phi_deg)
        return SweepRow(
            xi_deg=self.xi_deg,
            phi_deg=self.phi_deg,
            mean_purity=self.mean_purity,
            std_error=self.std_error,
            purity_unitary_model=purity_unitary_closed_form(phi),
            purity_collapse_model=purity_collapse_closed_form(phi),
        )


def _replicate_seed(master: int | None, point: int, rep: int) -> int:
    seq = np.random.SeedSequence(entropy=master, spawn_key=(point, rep))
    return int(seq.generate_state(1)[0])


def run_engine_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Exact engine purities, no emulated optics. Standard error is zero:
    a noiseless run is identical on every replicate."""
    rows = []
    for xi in spec.xi_grid():
        config = spec.config_at(xi)
        p = purity(run_chain(config).joint_readouts)
        phi = math.radians(2.0 * xi)
        rows.append(
            SweepRow(
                xi_deg=xi,
                phi_deg=2.0 * xi,
                mean_purity=p,
                std_error=0.0,
                purity_unitary_model=purity_unitary_closed_form(phi),
                purity_collapse_model=purity_collapse_closed_form(phi),
            )
        )
    return rows


def run_reconstruction_sweep(
    spec: SweepSpec,
    seed: int | None = None,
    geometry: PathGeometry | None = None,
    axis_plan: AxisPlan | None = None,
) -> list[SweepPoint]:
    """Full tomography emulation per grid point and replicate.

    Deterministic for a fixed master seed: each (point, replicate) pair gets
    an independent child seed regardless of grid shape or replicate counts.
    """
    geometry = geometry or build_geometry()
    plan = axis_plan or default_axis_plan()
    points = []
    for p_idx, xi in enumerate(spec.xi_grid()):
        config = spec.config_at(xi)
        truth = run_chain(config).joint_readouts
        reps = []
        for r_idx in range(spec.replicates_at(xi)):
            reps.append(
                reconstruct(
                    truth,
                    geometry=geometry,
                    axis_plan=plan,
                    noise=spec.noise,
                    seed=_replicate_seed(seed, p_idx, r_idx),
                    reference=truth,
                )
            )
        mean_m, std_m = replicate_average(reps)
        points.append(
            SweepPoint(
                xi_deg=xi,
                phi_deg=2.0 * xi,
                truth=truth,
                replicates=tuple(reps),
                mean_matrix=mean_m,
                std_matrix=std_m,
                purities=tuple(r.purity_estimate for r in reps),
            )
        )
    return points
