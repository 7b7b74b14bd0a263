"""Wire models for the HTTP service. Angles travel in degrees; matrices as
flat row-major real/imaginary arrays with their subsystem dimensions."""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, Field

from ..chain import ChainConfig, MeasurementSpec, Model
from ..linalg import DensityMatrix
from ..optics import NoiseParams
from ..sweeps import SweepSpec
from ..tomography import AxisPlan, AxisPlanEntry


class MeasurementModel(BaseModel):
    angle_deg: float
    dephase_after: bool = False


class ChainConfigModel(BaseModel):
    phi_deg: float = Field(ge=0.0, le=90.0)
    rotated_input: bool = False
    model: str = "unitary"
    measurements: list[MeasurementModel] = Field(min_length=1, max_length=8)

    def to_config(self) -> ChainConfig:
        return ChainConfig(
            phi=math.radians(self.phi_deg),
            rotated_input=self.rotated_input,
            measurements=tuple(
                MeasurementSpec(math.radians(m.angle_deg), m.dephase_after)
                for m in self.measurements
            ),
            model=Model(self.model),
        )


class MatrixModel(BaseModel):
    dims: list[int]
    re: list[float]
    im: list[float]

    @classmethod
    def from_density_matrix(cls, rho: DensityMatrix) -> "MatrixModel":
        flat = rho.matrix.reshape(-1)
        return cls(dims=list(rho.dims), re=flat.real.tolist(), im=flat.imag.tolist())

    @classmethod
    def from_array(cls, m: np.ndarray, dims: tuple[int, ...]) -> "MatrixModel":
        flat = np.asarray(m, dtype=complex).reshape(-1)
        return cls(dims=list(dims), re=flat.real.tolist(), im=flat.imag.tolist())


class MatrixRequest(BaseModel):
    config: ChainConfigModel


class MatrixResponse(BaseModel):
    joint_readouts: MatrixModel
    joint_with_q: MatrixModel
    purity: float
    magnitudes: list[list[float]]


class NoiseModel(BaseModel):
    background_fraction: float = Field(default=0.01, ge=0.0)
    shot_scale: float = Field(default=0.01, ge=0.0)

    def to_params(self) -> NoiseParams:
        return NoiseParams(self.background_fraction, self.shot_scale)


class SweepSpecModel(BaseModel):
    xi_start: float = 0.0
    xi_end: float = 22.5
    xi_step: float = Field(default=2.25, gt=0.0)
    replicates: int = Field(default=5, ge=1)
    noise: NoiseModel | None = None
    compensation: tuple[bool, bool, bool] = (True, True, True)
    tapered_replicates: bool = False
    rotated_input: bool = True

    def to_spec(self) -> SweepSpec:
        return SweepSpec(
            xi_start=self.xi_start,
            xi_end=self.xi_end,
            xi_step=self.xi_step,
            replicates=self.replicates,
            noise=None if self.noise is None else self.noise.to_params(),
            compensation=self.compensation,
            tapered_replicates=self.tapered_replicates,
            rotated_input=self.rotated_input,
        )


class SweepRequest(BaseModel):
    spec: SweepSpecModel = SweepSpecModel()
    seed: int | None = None


class SweepRowModel(BaseModel):
    xi_deg: float
    phi_deg: float
    mean_purity: float
    std_error: float
    purity_unitary_model: float
    purity_collapse_model: float


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class VennRequest(BaseModel):
    config: ChainConfigModel


class VennModel(BaseModel):
    partition: list[str]
    region_entropies: dict[str, float]
    conditional: float
    mutual: dict[str, float]
    regions: dict[str, float]


class VennStageModel(BaseModel):
    stage: int
    unitary: VennModel
    collapse: VennModel


class VennResponse(BaseModel):
    stages: list[VennStageModel]


class AxisPlanEntryModel(BaseModel):
    axis_angle_deg: float
    blocked: list[str] = []


class AxisPlanModel(BaseModel):
    entries: list[AxisPlanEntryModel]
    assumed_zero: list[tuple[str, str]] = []

    def to_plan(self) -> AxisPlan:
        return AxisPlan(
            entries=tuple(
                AxisPlanEntry(e.axis_angle_deg, tuple(e.blocked)) for e in self.entries
            ),
            assumed_zero=tuple(tuple(p) for p in self.assumed_zero),
        )


class ReconstructRequest(BaseModel):
    spec: SweepSpecModel = SweepSpecModel(noise=NoiseModel())
    axis_plan: AxisPlanModel | None = None
    seed: int | None = None
    include_matrices: bool = True


class ReconstructPointModel(BaseModel):
    xi_deg: float
    phi_deg: float
    mean_purity: float
    std_error: float
    purity_unitary_model: float
    purity_collapse_model: float
    purities: list[float]
    blocked_paths: list[str]
    mean_matrix: MatrixModel | None = None
    std_matrix: list[list[float]] | None = None
    element_errors: list[list[float]] | None = None


class ReconstructResponse(BaseModel):
    points: list[ReconstructPointModel]


class HealthResponse(BaseModel):
    status: str
    version: str
