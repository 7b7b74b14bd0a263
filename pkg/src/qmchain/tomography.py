"""Density-matrix reconstruction from emulated fringe acquisitions.

One reconstruction mirrors a lab run end to end:

* eight single-path acquisitions give the diagonal: each path's mean
  intensity divided by the total (a per-path background that scales with
  the path's own peak cancels under this normalization);
* a plan of (axis angle, blocked paths) acquisitions gives the
  off-diagonals: every camera slice is synthesized, optionally degraded by
  noise, and inverted with ``dft_extract``; pairs measured more than once
  are averaged;
* pairs no acquisition can resolve must be declared as assumed-zero in the
  plan, or the reconstruction refuses to fill them in silently;
* the assembled matrix is projected to the nearest valid state:
  symmetrize, clip negative eigenvalues, renormalize the trace.

The purity estimate is taken from the assembled matrix BEFORE projection,
with the extraction variances subtracted from each squared magnitude:
clipping eigenvalues biases Tr(rho^2) low by more than a typical standard
error, and the plain quadratic form is biased high by the noise variance
itself. The debiased estimator

    sum_d (d^2 - Var d) + 2 sum_pairs (|m|^2 - Var m)

has no such offset; its residual error is dominated by the genuine
shot-to-shot scatter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DensityMatrix, matrix_to_json_dict
from .optics import (
    DEFAULT_SAMPLE_COUNT,
    NoiseParams,
    PathGeometry,
    add_noise,
    block_paths,
    build_geometry,
    dft_extract,
    readout_matrix_for_geometry,
    synthesize_fringes,
)


@dataclass(frozen=True)
class AxisPlanEntry:
    """One camera acquisition: transform axis angle plus paths blocked."""

    axis_angle: float
    blocked: tuple[str, ...] = ()


@dataclass(frozen=True)
class AxisPlan:
    entries: tuple[AxisPlanEntry, ...]
    assumed_zero: tuple[tuple[str, str], ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "entries": [
                {"axis_angle_deg": e.axis_angle, "blocked": list(e.blocked)}
                for e in self.entries
            ],
            "assumed_zero": [list(p) for p in self.assumed_zero],
        }


def axis_plan_from_json_dict(doc: dict) -> AxisPlan:
    return AxisPlan(
        entries=tuple(
            AxisPlanEntry(
                axis_angle=float(e["axis_angle_deg"]),
                blocked=tuple(e.get("blocked", ())),
            )
            for e in doc["entries"]
        ),
        assumed_zero=tuple((p[0], p[1]) for p in doc.get("assumed_zero", ())),
    )


def default_axis_plan() -> AxisPlan:
    """The acquisition schedule a standard layout needs.

    Two horizontal-axis runs with one outer column blocked each (blocking
    lifts the equal-spacing degeneracy of the remaining row pairs), one
    vertical-axis run for the four vertical pairs, and two diagonal-axis
    runs for the in-block anti-diagonal pairs. Pairs whose outcome strings
    differ in the last stage's bit never share a camera slice here; they
    are declared assumed-zero, which is exactly where the joint state of
    this chain carries no coherence.
    """
    labels = [f"{m1}{m2}{m3}" for m1 in (0, 1) for m2 in (0, 1) for m3 in (0, 1)]
    assumed = tuple(
        (a, b)
        for i, a in enumerate(labels)
        for b in labels[i + 1 :]
        if a[2] != b[2]
    )
    return AxisPlan(
        entries=(
            AxisPlanEntry(0.0, ("001", "011")),  # left column out (a1, a8)
            AxisPlanEntry(0.0, ("100", "110")),  # right column out (a4, a5)
            AxisPlanEntry(90.0),
            AxisPlanEntry(45.0),
            AxisPlanEntry(135.0),
        ),
        assumed_zero=assumed,
    )


@dataclass(frozen=True)
class ReconstructionResult:
    """Output of one emulated tomography run.

    ``rho_hat`` is the projected state over the three readouts in outcome
    bit order. ``element_errors`` is |rho_hat - reference| when a reference
    was supplied. ``purity_estimate`` is the debiased pre-projection value
    (see module docstring). ``blocked_paths`` collects every label excluded
    during some acquisition of the plan.
    """

    rho_hat: DensityMatrix
    element_errors: np.ndarray | None
    blocked_paths: tuple[str, ...]
    purity_estimate: float
    extracted_pairs: tuple[tuple[str, str], ...]
    assumed_zero: tuple[tuple[str, str], ...]
    coherence_variances: dict[tuple[str, str], float] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "rho_hat": matrix_to_json_dict(self.rho_hat),
            "element_errors": None
            if self.element_errors is None
            else self.element_errors.tolist(),
            "blocked_paths": list(self.blocked_paths),
            "purity_estimate": self.purity_estimate,
            "extracted_pairs": [list(p) for p in self.extracted_pairs],
            "assumed_zero": [list(p) for p in self.assumed_zero],
            "coherence_variances": {
                f"{a},{b}": v for (a, b), v in self.coherence_variances.items()
            },
        }


def _acquisition_seed(master: int | None, index: int) -> int:
    return int(np.random.SeedSequence(entropy=master, spawn_key=(index,)).generate_state(1)[0])


def _acquire(pattern, noise: NoiseParams | None, seed: int | None, index: int):
    if noise is None:
        return pattern
    background = noise.background_fraction * float(np.max(pattern.intensities))
    return add_noise(pattern, background, noise.shot_scale, _acquisition_seed(seed, index))


def reconstruct(
    rho: DensityMatrix,
    geometry: PathGeometry | None = None,
    axis_plan: AxisPlan | None = None,
    noise: NoiseParams | None = None,
    seed: int | None = None,
    reference: DensityMatrix | None = None,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
) -> ReconstructionResult:
    """Emulate a full tomography of the readout state ``rho`` (8x8, outcome
    bit order) and reconstruct it from the synthetic camera data.

    ``reference``, when given, is only compared against; the acquisition is
    always driven by ``rho``. Deterministic for a fixed ``seed``.
    """
    geometry = geometry or build_geometry()
    plan = axis_plan or default_axis_plan()
    if rho.dim != len(geometry.paths):
        raise ValueError(
            f"state dimension {rho.dim} does not match the {len(geometry.paths)}-path geometry"
        )

    acquisition = 0
    # diagonal: one flat acquisition per path
    d_raw: dict[str, float] = {}
    d_var: dict[str, float] = {}
    for label in geometry.labels:
        solo = block_paths(geometry, [l for l in geometry.labels if l != label])
        sub = readout_matrix_for_geometry(rho, solo)
        pattern = synthesize_fringes(sub, solo, 0.0, sample_count)
        pattern = _acquire(pattern, noise, seed, acquisition)
        acquisition += 1
        vals = pattern.intensities
        d_raw[label] = float(np.mean(vals))
        d_var[label] = float(np.var(vals, ddof=1)) / len(vals)
    total = sum(d_raw.values())
    if total <= 0:
        raise ValueError("no intensity reached the camera; cannot normalize")
    diag = {k: v / total for k, v in d_raw.items()}
    diag_var = {k: v / total**2 for k, v in d_var.items()}

    # off-diagonals: slice-by-slice fringe inversion per plan entry
    collected: dict[tuple[str, str], list[tuple[complex, float]]] = {}
    for entry in plan.entries:
        g = block_paths(geometry, list(entry.blocked)) if entry.blocked else geometry
        sub = readout_matrix_for_geometry(rho, g)
        for coord in g.slice_coordinates(entry.axis_angle):
            if len(g.slice_labels(entry.axis_angle, coord)) < 2:
                continue
            pattern = synthesize_fringes(
                sub, g, entry.axis_angle, sample_count, slice_coordinate=coord
            )
            pattern = _acquire(pattern, noise, seed, acquisition)
            acquisition += 1
            ext = dft_extract(pattern, g)
            for pair, est in ext.coherences.items():
                collected.setdefault(pair, []).append((est, ext.variances[pair]))

    coherences: dict[tuple[str, str], complex] = {}
    variances: dict[tuple[str, str], float] = {}
    for pair, readings in collected.items():
        ests = [e for e, _ in readings]
        coherences[pair] = sum(ests) / len(ests)
        variances[pair] = sum(v for _, v in readings) / len(readings) ** 2

    # coverage: everything must be measured or declared
    declared = {frozenset(p) for p in plan.assumed_zero}
    measured = {frozenset(p) for p in coherences}
    labels = geometry.labels
    missing = [
        (a, b)
        for i, a in enumerate(labels)
        for b in labels[i + 1 :]
        if frozenset((a, b)) not in declared and frozenset((a, b)) not in measured
    ]
    if missing:
        raise ValueError(
            f"axis plan leaves {len(missing)} pairs neither measured nor "
            f"declared zero, e.g. {missing[0]}"
        )

    # assemble in outcome bit order
    n = len(labels)
    idx = {label: int(label, 2) for label in labels}
    m = np.zeros((n, n), dtype=complex)
    for label in labels:
        m[idx[label], idx[label]] = diag[label]
    for (a, b), est in coherences.items():
        m[idx[a], idx[b]] = est
        m[idx[b], idx[a]] = est.conjugate()

    purity = sum(diag[l] ** 2 - diag_var[l] for l in labels) + 2.0 * sum(
        abs(est) ** 2 - variances[pair] for pair, est in coherences.items()
    )

    # projection to the nearest valid state
    herm = 0.5 * (m + m.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    evals = np.clip(evals, 0.0, None)
    projected = (evecs * evals) @ evecs.conj().T
    projected /= np.trace(projected).real
    dims = (2,) * int(math.log2(n)) if 2 ** int(math.log2(n)) == n else (n,)
    rho_hat = DensityMatrix(projected, dims)

    element_errors = (
        None if reference is None else np.abs(rho_hat.matrix - reference.matrix)
    )
    blocked = tuple(sorted({lab for e in plan.entries for lab in e.blocked}))
    return ReconstructionResult(
        rho_hat=rho_hat,
        element_errors=element_errors,
        blocked_paths=blocked,
        purity_estimate=float(purity),
        extracted_pairs=tuple(sorted(coherences)),
        assumed_zero=plan.assumed_zero,
        coherence_variances=variances,
    )


def replicate_average(results: list[ReconstructionResult]) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise mean and standard deviation over repeated runs. The
    deviation of a complex entry is its distance from the element mean."""
    if not results:
        raise ValueError("need at least one reconstruction")
    stack = np.stack([r.rho_hat.matrix for r in results])
    mean = stack.mean(axis=0)
    if len(results) == 1:
        return mean, np.zeros_like(mean, dtype=float)
    dev2 = np.abs(stack - mean) ** 2
    std = np.sqrt(dev2.sum(axis=0) / (len(results) - 1))
    return mean, std
