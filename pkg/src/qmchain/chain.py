"""Chains of consecutive projective measurements on a single qubit.

Two models of the same measurement sequence:

* ``unitary_chain`` keeps every amplitude: the input qubit is purified
  against an untouched same-dimension reference, and each measurement is a
  reversible controlled-copy onto a fresh two-level readout, taken in a basis
  rotated by the stage's relative angle from the previous stage's basis.
* ``collapse_chain`` runs the same interaction but classicalizes the record:
  after each stage beyond the first (and always after the last), coherences
  between distinct outcomes of that stage are deleted. Coherences the input
  state carries inside the first stage's basis survive in the record, which
  is what keeps the two models indistinguishable at two measurements.

Angle convention: ``relative_angle`` is the basis rotation applied to the
qubit before the stage's copy, measured from the previous stage's basis (for
the first stage, from the preparation basis). A rotation of pi/4 makes the
new basis mutually unbiased with the previous one, i.e. the stages form an
"orthogonal" measurement pair in Bloch-sphere terms. Angles reduce mod pi:
R(theta + pi) = -R(theta) acts identically by conjugation.

Register order of results: ``joint_with_q`` is (Q, M1, ..., MN) with Q
expressed in the final stage's basis; ``joint_readouts`` is (M1, ..., MN);
outcome 0 is listed first in every readout factor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DensityMatrix,
    dephase_matrix,
    partial_trace_matrix,
    purify,
)

MAX_MEASUREMENTS = 8


def rotation_matrix(theta: float) -> np.ndarray:
    """Real rotation [[cos, sin], [-sin, cos]]; the fixed basis-change gate."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not math.isfinite(phi) or not (0.0 <= phi <= math.pi / 2 + 1e-12):
        raise ValueError(f"mixing angle must lie in [0, pi/2], got {phi!r}")
    return min(phi, math.pi / 2)


def prepare_diagonal_state(phi: float) -> DensityMatrix:
    """sin^2(phi) |0><0| + cos^2(phi) |1><1| (H is index 0, V is index 1)."""
    phi = _check_phi(phi)
    s, c = math.sin(phi) ** 2, math.cos(phi) ** 2
    return DensityMatrix(np.diag([s, c]).astype(complex), (2,))


def prepare_nondiagonal_state(phi: float) -> DensityMatrix:
    """(1/2) [[1, cos 2phi], [cos 2phi, 1]]: same mixedness, uniform diagonal."""
    phi = _check_phi(phi)
    c = math.cos(2 * phi)
    return DensityMatrix(0.5 * np.array([[1, c], [c, 1]], dtype=complex), (2,))


def rotate_state(rho: DensityMatrix, theta: float) -> DensityMatrix:
    """R(theta) rho R(theta)^dagger on a single qubit."""
    if rho.dim != 2:
        raise ValueError(f"rotate_state expects a qubit, got dimension {rho.dim}")
    r = rotation_matrix(theta)
    return DensityMatrix(r @ rho.matrix @ r.conj().T, (2,))


class Model(str, enum.Enum):
    UNITARY = "unitary"
    COLLAPSE = "collapse"


@dataclass(frozen=True)
class MeasurementSpec:
    """One stage: basis angle relative to the previous stage, plus whether the
    stage's readout is dephased afterwards (uncompensated walk-off)."""

    relative_angle: float
    dephase_after: bool = False

    def __post_init__(self):
        a = float(self.relative_angle)
        if not math.isfinite(a):
            raise ValueError(f"relative_angle must be finite, got {a!r}")
        object.__setattr__(self, "relative_angle", a % math.pi)


@dataclass(frozen=True)
class ChainConfig:
    phi: float
    rotated_input: bool = False
    measurements: tuple[MeasurementSpec, ...] = field(default_factory=tuple)
    model: Model = Model.UNITARY

    def __post_init__(self):
        object.__setattr__(self, "phi", _check_phi(self.phi))
        ms = tuple(self.measurements)
        if not 1 <= len(ms) <= MAX_MEASUREMENTS:
            raise ValueError(
                f"measurement count must be in [1, {MAX_MEASUREMENTS}], got {len(ms)}"
            )
        object.__setattr__(self, "measurements", ms)
        object.__setattr__(self, "model", Model(self.model))

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(m.relative_angle for m in self.measurements)

    def input_state(self) -> DensityMatrix:
        if self.rotated_input:
            return prepare_nondiagonal_state(self.phi)
        return prepare_diagonal_state(self.phi)


def orthogonal_sequence_config(
    phi: float,
    *,
    rotated_input: bool,
    stages: int = 3,
    model: Model = Model.UNITARY,
    dephase_stages: tuple[int, ...] = (),
) -> ChainConfig:
    """The canonical configuration: first stage in the preparation basis,
    every later stage rotated pi/4 from the one before.

    For the diagonal input the first angle is pi/2 rather than 0: that is the
    same measurement basis with the outcome labels exchanged, which lists the
    cos^2(phi) branch first and makes the results match the conventional
    display of the two- and three-stage joint matrices. For the non-diagonal
    input the first stage measures at angle 0 in the already-rotated frame;
    the two choices describe the same physical sequence.

    ``dephase_stages`` lists 1-based stage numbers whose readout loses its
    coherence afterwards (walk-off left uncompensated on that stage).
    """
    if stages < 1:
        raise ValueError("need at least one stage")
    first = 0.0 if rotated_input else math.pi / 2
    angles = [first] + [math.pi / 4] * (stages - 1)
    ms = tuple(
        MeasurementSpec(a, dephase_after=(k + 1) in dephase_stages)
        for k, a in enumerate(angles)
    )
    return ChainConfig(phi=phi, rotated_input=rotated_input, measurements=ms, model=model)


@dataclass(frozen=True)
class ChainResult:
    """States produced by a measurement chain.

    * ``joint_readouts``: (M1..MN), the record alone;
    * ``joint_with_q``: (Q, M1..MN), Q in the final stage's basis;
    * ``per_stage``: readout-only joint state after each stage;
    * ``full_with_reference``: (Q, R, M1..MN). Pure for the unitary model.
    """

    joint_readouts: DensityMatrix
    joint_with_q: DensityMatrix
    per_stage: tuple[DensityMatrix, ...]
    full_with_reference: DensityMatrix


def _attach_and_copy(rho: np.ndarray, dims: list[int]) -> tuple[np.ndarray, list[int]]:
    """Append a fresh two-level readout correlated with Q's basis states:
    |i>_Q |0> -> |i>_Q |i>. Q is subsystem 0."""
    d = int(np.prod(dims))
    rest = d // 2
    r4 = rho.reshape(2, rest, 2, rest)
    new = np.zeros((d * 2, d * 2), dtype=complex)
    n6 = new.reshape(2, rest, 2, 2, rest, 2)
    for q in range(2):
        for qp in range(2):
            n6[q, :, q, qp, :, qp] = r4[q, :, qp, :]
    return new, dims + [2]


def _run(config: ChainConfig, classicalize: bool) -> ChainResult:
    psi = purify(config.input_state())
    rho = np.outer(psi, psi.conj())
    dims = [2, 2]  # Q, R
    n = len(config.measurements)
    per_stage: list[DensityMatrix] = []
    for k, spec in enumerate(config.measurements, start=1):
        d = int(np.prod(dims))
        u = np.kron(rotation_matrix(spec.relative_angle), np.eye(d // 2, dtype=complex))
        rho = u @ rho @ u.conj().T
        rho, dims = _attach_and_copy(rho, dims)
        readout_index = len(dims) - 1
        if spec.dephase_after or (classicalize and (k >= 2 or k == n)):
            rho = dephase_matrix(rho, dims, readout_index)
        readout_indices = list(range(2, len(dims)))
        per_stage.append(
            DensityMatrix(partial_trace_matrix(rho, dims, readout_indices), (2,) * k)
        )
    readout_indices = list(range(2, len(dims)))
    joint_readouts = DensityMatrix(
        partial_trace_matrix(rho, dims, readout_indices), (2,) * n
    )
    joint_with_q = DensityMatrix(
        partial_trace_matrix(rho, dims, [0] + readout_indices), (2,) * (n + 1)
    )
    full = DensityMatrix(rho, tuple(dims))
    return ChainResult(
        joint_readouts=joint_readouts,
        joint_with_q=joint_with_q,
        per_stage=tuple(per_stage),
        full_with_reference=full,
    )


def unitary_chain(config: ChainConfig) -> ChainResult:
    """Amplitude-preserving model: purification, rotations, controlled copies."""
    if config.model is not Model.UNITARY:
        raise ValueError(f"config.model is {config.model.value}, expected unitary")
    return _run(config, classicalize=False)


def collapse_chain(config: ChainConfig) -> ChainResult:
    """Projection model: outcome branches carry Born-rule weights and the
    record is classical across distinct outcomes of each stage beyond the
    first; input coherences inside the first stage's basis survive."""
    if config.model is not Model.COLLAPSE:
        raise ValueError(f"config.model is {config.model.value}, expected collapse")
    return _run(config, classicalize=True)


def run_chain(config: ChainConfig) -> ChainResult:
    if config.model is Model.UNITARY:
        return unitary_chain(config)
    return collapse_chain(config)


def purity_unitary_closed_form(phi: float) -> float:
    """Record purity after the three-stage orthogonal sequence, all
    amplitudes kept: (1/4)(1 + cos^2 2phi)."""
    phi = _check_phi(phi)
    return 0.25 * (1.0 + math.cos(2 * phi) ** 2)


def purity_collapse_closed_form(phi: float) -> float:
    """Same sequence under collapse: (1/8)(1 + cos^2 2phi), exactly half."""
    phi = _check_phi(phi)
    return 0.125 * (1.0 + math.cos(2 * phi) ** 2)


# ---------------------------------------------------------------------------
# JSON wire form: degrees outside, radians inside.
# ---------------------------------------------------------------------------

def config_to_json_dict(config: ChainConfig) -> dict:
    return {
        "phi_deg": math.degrees(config.phi),
        "rotated_input": config.rotated_input,
        "model": config.model.value,
        "measurements": [
            {"angle_deg": math.degrees(m.relative_angle), "dephase_after": m.dephase_after}
            for m in config.measurements
        ],
    }


def config_from_json_dict(doc: dict) -> ChainConfig:
    return ChainConfig(
        phi=math.radians(float(doc["phi_deg"])),
        rotated_input=bool(doc.get("rotated_input", False)),
        measurements=tuple(
            MeasurementSpec(
                relative_angle=math.radians(float(m["angle_deg"])),
                dephase_after=bool(m.get("dephase_after", False)),
            )
            for m in doc["measurements"]
        ),
        model=Model(doc.get("model", "unitary")),
    )
