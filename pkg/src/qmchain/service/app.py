"""HTTP surface over the chain engine, entropy reports, sweeps, and
emulated tomography. All request validation errors and domain-level
ValueErrors surface as 422 responses; anything else is a 500."""

from __future__ import annotations

from dataclasses import asdict

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..chain import ChainConfig, Model, run_chain
from ..info import venn
from ..linalg import purity
from ..sweeps import run_engine_sweep, run_reconstruction_sweep
from .schemas import (
    HealthResponse,
    MatrixModel,
    MatrixRequest,
    MatrixResponse,
    ReconstructPointModel,
    ReconstructRequest,
    ReconstructResponse,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
    VennModel,
    VennRequest,
    VennResponse,
    VennStageModel,
)

app = FastAPI(title="qmchain", version=__version__)


@app.exception_handler(ValueError)
async def _value_error_handler(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/api/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/api/matrix", response_model=MatrixResponse)
def matrix_endpoint(req: MatrixRequest) -> MatrixResponse:
    result = run_chain(req.config.to_config())
    readouts = result.joint_readouts
    return MatrixResponse(
        joint_readouts=MatrixModel.from_density_matrix(readouts),
        joint_with_q=MatrixModel.from_density_matrix(result.joint_with_q),
        purity=purity(readouts),
        magnitudes=np.abs(readouts.matrix).tolist(),
    )


@app.post("/api/sweep", response_model=SweepResponse)
def sweep_endpoint(req: SweepRequest) -> SweepResponse:
    spec = req.spec.to_spec()
    if spec.noise is None:
        rows = run_engine_sweep(spec)
    else:
        rows = [p.row() for p in run_reconstruction_sweep(spec, seed=req.seed)]
    return SweepResponse(rows=[SweepRowModel(**asdict(r)) for r in rows])


@app.post("/api/venn", response_model=VennResponse)
def venn_endpoint(req: VennRequest) -> VennResponse:
    base = req.config.to_config()
    stages = []
    for k in range(1, len(base.measurements) + 1):
        reports = {}
        for model in (Model.UNITARY, Model.COLLAPSE):
            cfg = ChainConfig(
                phi=base.phi,
                rotated_input=base.rotated_input,
                measurements=base.measurements[:k],
                model=model,
            )
            state = run_chain(cfg).joint_with_q
            labels = ["Q"] + [f"M{i}" for i in range(1, k + 1)]
            reports[model.value] = VennModel(**venn(state, labels).to_json_dict())
        stages.append(
            VennStageModel(stage=k, unitary=reports["unitary"], collapse=reports["collapse"])
        )
    return VennResponse(stages=stages)


@app.post("/api/reconstruct", response_model=ReconstructResponse)
def reconstruct_endpoint(req: ReconstructRequest) -> ReconstructResponse:
    spec = req.spec.to_spec()
    plan = req.axis_plan.to_plan() if req.axis_plan is not None else None
    points = run_reconstruction_sweep(spec, seed=req.seed, axis_plan=plan)
    out = []
    for p in points:
        row = p.row()
        out.append(
            ReconstructPointModel(
                xi_deg=row.xi_deg,
                phi_deg=row.phi_deg,
                mean_purity=row.mean_purity,
                std_error=row.std_error,
                purity_unitary_model=row.purity_unitary_model,
                purity_collapse_model=row.purity_collapse_model,
                purities=list(p.purities),
                blocked_paths=list(p.replicates[0].blocked_paths),
                mean_matrix=MatrixModel.from_array(p.mean_matrix, p.truth.dims)
                if req.include_matrices
                else None,
                std_matrix=p.std_matrix.tolist() if req.include_matrices else None,
                element_errors=np.abs(p.mean_matrix - p.truth.matrix).tolist()
                if req.include_matrices
                else None,
            )
        )
    return ReconstructResponse(points=out)
