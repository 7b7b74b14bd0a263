"""Beam-displacer measurement geometry and interference fringe emulation.

The three-stage chain is realized optically by mapping each outcome triple
(m1, m2, m3) to a beam path at a transverse position: the first displacer
shifts the measured component by dx along x, the second by dy along y, the
third shifts its component by dX along x. With the conventional bit
assignment (stage 1 and 2 displace outcome 1, stage 3 displaces outcome 0):

    x = dx * m1 + dX * (1 - m3),   y = dy * m2.

Paths are read out on a camera after an optical Fourier transform along a
chosen axis direction while the orthogonal direction stays imaged. Two
paths therefore interfere only when they share the same transverse
coordinate; each group of paths with a common transverse coordinate (a
"slice") produces its own fringe pattern, and a pair's fringe frequency is
set by the projection of its separation onto the transform axis.

``synthesize_fringes`` emulates one camera acquisition: either a single
slice (the physical situation) or, with ``slice_coordinate=None``, the
transversally integrated pattern in which all paths are summed into one
trace. ``dft_extract`` inverts a pattern back to complex coherence
estimates by least squares on the known frequencies, flagging pairs whose
projected spacings coincide instead of guessing.

Units: positions and displacements in millimeters; the fringe coordinate u
runs over [0, 1) in arbitrary transverse units, and a path-pair separation
of FRINGE_PITCH_MM produces exactly one fringe cycle across the window
(wavelength and focal length are absorbed into that constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DensityMatrix, as_complex_matrix

FRINGE_PITCH_MM = 0.1
KAPPA = 2.0 * math.pi / FRINGE_PITCH_MM  # phase per (mm of separation x window unit)
DEFAULT_SAMPLE_COUNT = 512
_COORD_DECIMALS = 9  # positions closer than 1e-9 mm count as the same point


def _round_coord(value: float) -> float:
    return round(float(value), _COORD_DECIMALS)


# Conventional path numbering of the standard layout: bottom row left to
# right then top row right to left. Used in prose and for blocking against
# the familiar pair names; the canonical identifier is always the bit label.
SERPENTINE_ALIASES = {
    "a1": "001", "a2": "101", "a3": "000", "a4": "100",
    "a5": "110", "a6": "010", "a7": "111", "a8": "011",
}


@dataclass(frozen=True)
class PathGeometry:
    """Eight (or fewer, after blocking) beam paths with their outcome labels.

    ``paths`` holds (label, s_x, s_y) in a fixed construction order; for the
    default displacements that order coincides with sorting by (s_x, s_y).
    """

    paths: tuple[tuple[str, float, float], ...]
    dx: float
    dy: float
    dX: float

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.paths)

    def position(self, label: str) -> tuple[float, float]:
        label = SERPENTINE_ALIASES.get(label, label)
        for name, sx, sy in self.paths:
            if name == label:
                return (sx, sy)
        raise KeyError(f"no path labelled {label!r}")

    def projected(self, axis_angle_deg: float) -> dict[str, tuple[float, float]]:
        """Per-path (along-axis, transverse) coordinates for a transform axis."""
        a = math.radians(axis_angle_deg)
        ax, ay = math.cos(a), math.sin(a)
        out = {}
        for name, sx, sy in self.paths:
            out[name] = (sx * ax + sy * ay, -sx * ay + sy * ax)
        return out

    def slice_coordinates(self, axis_angle_deg: float) -> tuple[float, ...]:
        """Distinct transverse coordinates, i.e. the camera rows."""
        proj = self.projected(axis_angle_deg)
        return tuple(sorted({_round_coord(t) for _, t in proj.values()}))

    def slice_labels(self, axis_angle_deg: float, coordinate: float) -> tuple[str, ...]:
        proj = self.projected(axis_angle_deg)
        key = _round_coord(coordinate)
        return tuple(
            name for name in self.labels if _round_coord(proj[name][1]) == key
        )

    def spacing_degeneracies(
        self, axis_angle_deg: float
    ) -> dict[float, tuple[tuple[str, str], ...]]:
        """Path pairs that cannot be told apart in a fringe pattern at this
        axis angle: pairs in the same slice whose projected separations
        coincide. Keys are the shared |separation| in mm; a key of 0.0 means
        the pair sits at the same point along the axis (lost in the DC term).
        """
        proj = self.projected(axis_angle_deg)
        groups: dict[tuple[float, float], list[tuple[str, str]]] = {}
        labels = self.labels
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                a, b = labels[i], labels[j]
                if _round_coord(proj[a][1]) != _round_coord(proj[b][1]):
                    continue  # different camera rows never interfere
                s = abs(_round_coord(proj[a][0] - proj[b][0]))
                key = (_round_coord(proj[a][1]), s)
                groups.setdefault(key, []).append((a, b))
        report: dict[float, list[tuple[str, str]]] = {}
        for (_, s), pairs in groups.items():
            if len(pairs) > 1 or s == 0.0:
                report.setdefault(s, []).extend(pairs)
        return {s: tuple(pairs) for s, pairs in sorted(report.items())}

    def to_json_dict(self) -> dict:
        return {
            "displacements_mm": {"dx": self.dx, "dy": self.dy, "dX": self.dX},
            "paths": [
                {"label": name, "s_x_mm": sx, "s_y_mm": sy}
                for name, sx, sy in self.paths
            ],
        }


def geometry_from_json_dict(doc: dict) -> PathGeometry:
    d = doc["displacements_mm"]
    return PathGeometry(
        paths=tuple(
            (p["label"], float(p["s_x_mm"]), float(p["s_y_mm"]))
            for p in doc["paths"]
        ),
        dx=float(d["dx"]),
        dy=float(d["dy"]),
        dX=float(d["dX"]),
    )


def build_geometry(dx: float = 2.7, dy: float = 2.7, dX: float = 4.0) -> PathGeometry:
    """Standard eight-path layout. Order: third-stage-displaced block last,
    within a block by (m1, m2); for the default displacements that is also
    the left-to-right, bottom-to-top reading of the layout."""
    for name, v in (("dx", dx), ("dy", dy), ("dX", dX)):
        if not (v > 0):
            raise ValueError(f"displacement {name} must be positive, got {v!r}")
    paths = []
    for m3_shift in (0, 1):  # 1 - m3: unshifted block first
        for m1 in (0, 1):
            for m2 in (0, 1):
                m3 = 1 - m3_shift
                label = f"{m1}{m2}{m3}"
                paths.append((label, dx * m1 + dX * m3_shift, dy * m2))
    positions = {(_round_coord(sx), _round_coord(sy)) for _, sx, sy in paths}
    if len(positions) != 8:
        raise ValueError(
            f"displacements dx={dx}, dy={dy}, dX={dX} do not separate all 8 paths"
        )
    return PathGeometry(paths=tuple(paths), dx=dx, dy=dy, dX=dX)


def _resolve_label(geometry: PathGeometry, label: str) -> str:
    name = SERPENTINE_ALIASES.get(label, label)
    if name not in geometry.labels:
        raise ValueError(f"unknown path label {label!r}")
    return name


def block_paths(geometry: PathGeometry, labels: list[str]) -> PathGeometry:
    """Remove the named paths (bit labels or a1..a8 aliases) from the layout."""
    drop = {_resolve_label(geometry, lab) for lab in labels}
    kept = tuple(p for p in geometry.paths if p[0] not in drop)
    if not kept:
        raise ValueError("cannot block every path")
    return PathGeometry(paths=kept, dx=geometry.dx, dy=geometry.dy, dX=geometry.dX)


def readout_matrix_for_geometry(rho: DensityMatrix, geometry: PathGeometry) -> np.ndarray:
    """Sub-block of an 8x8 readout state in this geometry's path order.

    ``rho`` is indexed by the readout bit string (stage 1 bit most
    significant), so path label "m1m2m3" maps to row int(label, 2).
    """
    if rho.dim != 8:
        raise ValueError(f"expected an 8-dimensional readout state, got {rho.dim}")
    idx = [int(label, 2) for label in geometry.labels]
    return rho.matrix[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# Fringe synthesis and inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FringePattern:
    """One camera trace: intensity versus the dimensionless coordinate u.

    ``slice_coordinate`` names the camera row (transverse coordinate in mm)
    the trace came from, or None for a transversally integrated pattern.
    ``effective_spacings`` lists (label_a, label_b, separation_mm) for every
    interfering pair, with the separation projected on the transform axis
    and oriented so it is nonnegative.
    """

    axis_angle: float
    coordinates: np.ndarray
    intensities: np.ndarray
    path_labels: tuple[str, ...]
    slice_coordinate: float | None
    effective_spacings: tuple[tuple[str, str, float], ...]

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.coordinates.tolist(), self.intensities.tolist()))

    def to_csv(self) -> str:
        lines = [
            f"# axis_angle_deg: {float(self.axis_angle)!r}",
            f"# slice_mm: {'' if self.slice_coordinate is None else repr(float(self.slice_coordinate))}",
            f"# paths: {','.join(self.path_labels)}",
            "coordinate,intensity",
        ]
        for u, i in zip(self.coordinates, self.intensities):
            lines.append(f"{float(u)!r},{float(i)!r}")
        return "\n".join(lines) + "\n"


def fringe_pattern_from_csv(text: str, geometry: PathGeometry) -> FringePattern:
    axis_angle = None
    slice_coord: float | None = None
    labels: tuple[str, ...] = ()
    coords, vals = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key, value = key.strip(), value.strip()
            if key == "axis_angle_deg":
                axis_angle = float(value)
            elif key == "slice_mm":
                slice_coord = float(value) if value else None
            elif key == "paths":
                labels = tuple(value.split(","))
            continue
        if line.startswith("coordinate"):
            continue
        u, _, i = line.partition(",")
        coords.append(float(u))
        vals.append(float(i))
    if axis_angle is None or not labels:
        raise ValueError("fringe CSV is missing its axis/path header lines")
    return FringePattern(
        axis_angle=axis_angle,
        coordinates=np.array(coords),
        intensities=np.array(vals),
        path_labels=labels,
        slice_coordinate=slice_coord,
        effective_spacings=_pair_spacings(geometry, axis_angle, labels),
    )


def _pair_spacings(
    geometry: PathGeometry, axis_angle_deg: float, labels: tuple[str, ...]
) -> tuple[tuple[str, str, float], ...]:
    """Exact projected separations, oriented nonnegative. Degeneracy grouping
    happens at coordinate-rounding precision, but fits use the exact value."""
    proj = geometry.projected(axis_angle_deg)
    out = []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = labels[i], labels[j]
            s = proj[a][0] - proj[b][0]
            if _round_coord(s) < 0:
                a, b, s = b, a, -s
            if _round_coord(s) == 0.0:
                s = 0.0
            out.append((a, b, s))
    return tuple(out)


def _check_nyquist(spacings, sample_count: int) -> None:
    if not spacings:
        return
    max_cycles = max(s for _, _, s in spacings) / FRINGE_PITCH_MM
    if max_cycles >= sample_count / 2:
        raise ValueError(
            f"largest fringe frequency {max_cycles:.1f} cycles needs more than "
            f"{sample_count} samples per window"
        )


def synthesize_fringes(
    rho: DensityMatrix | np.ndarray,
    geometry: PathGeometry,
    axis_angle: float,
    sample_count: int = DEFAULT_SAMPLE_COUNT,
    slice_coordinate: float | None = None,
) -> FringePattern:
    """Far-field intensity trace I(u) = sum_jk rho_jk exp(i KAPPA u s_jk).

    ``rho`` is indexed in this geometry's path order (a sub-block of the
    full readout state when paths are blocked, left unnormalized so that
    the DC term reports the kept population). With a ``slice_coordinate``
    only the paths on that camera row contribute; with None every path is
    summed into a single integrated trace, which is physical only when all
    paths share one row but is still useful as the no-imaging limit.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    if m.shape[0] != len(geometry.paths):
        raise ValueError(
            f"state has {m.shape[0]} paths but geometry has {len(geometry.paths)}"
        )
    if sample_count < 2:
        raise ValueError("need at least two samples")
    labels = geometry.labels
    if slice_coordinate is not None:
        kept = geometry.slice_labels(axis_angle, slice_coordinate)
        if not kept:
            raise ValueError(
                f"no path lies on the slice at {slice_coordinate!r} mm "
                f"for axis angle {axis_angle!r}"
            )
    else:
        kept = labels
    keep_idx = [labels.index(k) for k in kept]
    sub = m[np.ix_(keep_idx, keep_idx)]
    proj = geometry.projected(axis_angle)
    along = np.array([proj[k][0] for k in kept])
    spacings = _pair_spacings(geometry, axis_angle, kept)
    _check_nyquist(spacings, sample_count)

    u = np.arange(sample_count) / sample_count
    phases = np.exp(1j * KAPPA * np.outer(u, along))  # (n, paths)
    intensity = np.einsum("ua,ab,ub->u", phases, sub, phases.conj()).real
    return FringePattern(
        axis_angle=float(axis_angle),
        coordinates=u,
        intensities=np.maximum(intensity, 0.0),
        path_labels=kept,
        slice_coordinate=None if slice_coordinate is None else float(slice_coordinate),
        effective_spacings=spacings,
    )


@dataclass(frozen=True)
class NoiseParams:
    """Camera noise knobs for emulated acquisitions: a constant background
    specified as a fraction of the pattern's peak, and a Poisson-like
    fluctuation scale. These are calibration knobs, not measured values."""

    background_fraction: float = 0.01
    shot_scale: float = 0.01

    def __post_init__(self):
        if self.background_fraction < 0 or self.shot_scale < 0:
            raise ValueError("noise parameters must be nonnegative")


def add_noise(
    pattern: FringePattern, background: float, shot_scale: float, seed: int
) -> FringePattern:
    """Constant background plus Poisson-like fluctuations, deterministic in
    ``seed``. Intensities are clipped at zero like a real camera's."""
    if background < 0 or shot_scale < 0:
        raise ValueError("noise parameters must be nonnegative")
    base = pattern.intensities + background
    rng = np.random.default_rng(seed)
    noisy = base + shot_scale * np.sqrt(np.clip(base, 0.0, None)) * rng.standard_normal(
        base.shape
    )
    return FringePattern(
        axis_angle=pattern.axis_angle,
        coordinates=pattern.coordinates,
        intensities=np.clip(noisy, 0.0, None),
        path_labels=pattern.path_labels,
        slice_coordinate=pattern.slice_coordinate,
        effective_spacings=pattern.effective_spacings,
    )


@dataclass(frozen=True)
class ExtractionResult:
    """DFT-style inversion of one fringe pattern.

    ``coherences`` maps (label_a, label_b) to the estimate of rho_ab, with
    the pair oriented so its projected separation is positive; ``variances``
    carries the residual-based variance of each complex estimate;
    ``unresolvable`` lists pairs whose frequency is shared with another pair
    (or sits at DC) so no estimate is possible. ``dc`` is the fitted
    constant term, i.e. the kept population plus any background.
    """

    coherences: dict[tuple[str, str], complex]
    variances: dict[tuple[str, str], float]
    unresolvable: tuple[tuple[str, str], ...]
    dc: float

    def get(self, a: str, b: str) -> complex | None:
        if (a, b) in self.coherences:
            return self.coherences[(a, b)]
        if (b, a) in self.coherences:
            return self.coherences[(b, a)].conjugate()
        return None


def dft_extract(pattern: FringePattern, geometry: PathGeometry) -> ExtractionResult:
    """Least-squares inversion of a fringe trace at its known frequencies.

    Pairs sharing a projected separation (within rounding) are flagged
    rather than fitted; a pattern whose pairs are all degenerate raises,
    since nothing could be learned from it.
    """
    for label in pattern.path_labels:
        if label not in geometry.labels:
            raise ValueError(f"pattern path {label!r} is not in the geometry")
    spacings = _pair_spacings(geometry, pattern.axis_angle, pattern.path_labels)
    _check_nyquist(spacings, len(pattern.coordinates))

    groups: dict[float, list[tuple[str, str, float]]] = {}
    for a, b, s in spacings:
        groups.setdefault(_round_coord(s), []).append((a, b, s))
    unresolvable: list[tuple[str, str]] = []
    fitted: list[tuple[float, tuple[str, str]]] = []
    for key, items in sorted(groups.items()):
        if key == 0.0 or len(items) > 1:
            unresolvable.extend((a, b) for a, b, _ in items)
        else:
            a, b, s = items[0]
            fitted.append((s, (a, b)))
    if spacings and not fitted:
        raise ValueError(
            "every path pair in this pattern shares its spacing with another; "
            "block paths or change the axis angle"
        )

    u = pattern.coordinates
    columns = [np.ones_like(u)]
    for s, _ in fitted:
        columns.append(2.0 * np.cos(KAPPA * s * u))
        columns.append(-2.0 * np.sin(KAPPA * s * u))
    a_mat = np.column_stack(columns)
    coef, _, _, _ = np.linalg.lstsq(a_mat, pattern.intensities, rcond=None)

    residual = pattern.intensities - a_mat @ coef
    dof = len(u) - a_mat.shape[1]
    sigma2 = float(residual @ residual) / dof if dof > 0 else 0.0
    cov_diag = sigma2 * np.diag(np.linalg.inv(a_mat.T @ a_mat))

    coherences: dict[tuple[str, str], complex] = {}
    variances: dict[tuple[str, str], float] = {}
    for i, (_, pair) in enumerate(fitted):
        re, im = coef[1 + 2 * i], coef[2 + 2 * i]
        coherences[pair] = complex(re, im)
        variances[pair] = float(cov_diag[1 + 2 * i] + cov_diag[2 + 2 * i])
    return ExtractionResult(
        coherences=coherences,
        variances=variances,
        unresolvable=tuple(unresolvable),
        dc=float(coef[0]),
    )


# ---------------------------------------------------------------------------
# Spinning-waveplate state preparation
# ---------------------------------------------------------------------------

def spinning_hwp_state(phi: float, omega: float, capture_time: float) -> DensityMatrix:
    """Polarization state behind a waveplate assembly spun at ``omega`` while
    the camera integrates for ``capture_time``.

    The diagonal is (cos^2 phi, sin^2 phi); the residual coherence is the
    time average of exp(2i omega t) over the exposure,

        C = sin(phi) cos(phi) * exp(i omega T) * sin(omega T) / (omega T),

    whose magnitude is bounded by sin(phi) cos(phi) * min(1, Omega/omega)
    with Omega = 1/capture_time. Spinning much faster than the exposure
    rate therefore leaves an incoherent mixture.
    """
    if not (omega > 0):
        raise ValueError(f"omega must be positive, got {omega!r}")
    if not (capture_time > 0):
        raise ValueError(f"capture_time must be positive, got {capture_time!r}")
    c, s = math.cos(phi), math.sin(phi)
    wt = omega * capture_time
    avg = complex(math.cos(wt), math.sin(wt)) * (math.sin(wt) / wt)
    off = s * c * avg
    m = np.array([[c * c, off], [off.conjugate(), s * s]], dtype=complex)
    return DensityMatrix(m, (2,))


# ---------------------------------------------------------------------------
# Polarization + path simulation of the displacer sequence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OpticalState:
    """Joint polarization (subsystem 0) and path state, with per-path
    position and outcome-bit bookkeeping. Paths are a growing register:
    each displacer doubles the path count."""

    matrix: np.ndarray
    positions: tuple[tuple[float, float], ...]
    bits: tuple[tuple[int, ...], ...]

    @property
    def n_paths(self) -> int:
        return len(self.positions)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.matrix, (2, self.n_paths) if self.n_paths > 1 else (2,))


def initial_optical_state(pol: DensityMatrix) -> OpticalState:
    if pol.dim != 2:
        raise ValueError("input polarization state must be a qubit")
    return OpticalState(matrix=pol.matrix.copy(), positions=((0.0, 0.0),), bits=((),))


def rotate_polarization(state: OpticalState, theta: float) -> OpticalState:
    c, s = math.cos(theta), math.sin(theta)
    r = np.kron(
        np.array([[c, s], [-s, c]], dtype=complex), np.eye(state.n_paths, dtype=complex)
    )
    return OpticalState(
        matrix=r @ state.matrix @ r.conj().T,
        positions=state.positions,
        bits=state.bits,
    )


def _projector_index(projector: np.ndarray) -> int:
    p = as_complex_matrix(projector)
    for idx in (0, 1):
        target = np.zeros((2, 2), dtype=complex)
        target[idx, idx] = 1.0
        if np.allclose(p, target, atol=1e-12):
            return idx
    raise ValueError(
        "displacer projector must select one polarization basis state "
        "(diag(1,0) or diag(0,1)) in the current frame"
    )


def apply_beam_displacer(
    state: OpticalState, delta: float, axis: str, projector: np.ndarray
) -> OpticalState:
    """Conditional translation: the projected polarization component's path
    shifts by ``delta`` along ``axis``; the orthogonal component stays. The
    shifted path records the projected basis index as its outcome bit.

    Raises when a shifted position lands on an unshifted one: the outcome
    would no longer be readable from the position, so the measurement
    would not be projective.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if not (delta > 0):
        raise ValueError(f"displacement must be positive, got {delta!r}")
    moved_bit = _projector_index(projector)
    dxy = (delta, 0.0) if axis == "x" else (0.0, delta)

    stay = state.positions
    moved = tuple(
        (_round_coord(x + dxy[0]), _round_coord(y + dxy[1])) for x, y in stay
    )
    stay = tuple((_round_coord(x), _round_coord(y)) for x, y in stay)
    if set(moved) & set(stay):
        raise ValueError(
            f"displacement {delta} along {axis} makes shifted and unshifted "
            "paths collide; the readout would not be projective"
        )

    n = state.n_paths
    # new register: unshifted paths first, then shifted, preserving order
    stay_map = np.zeros((2 * n, n))
    move_map = np.zeros((2 * n, n))
    for i in range(n):
        stay_map[i, i] = 1.0
        move_map[n + i, i] = 1.0
    p_moved = np.zeros((2, 2), dtype=complex)
    p_moved[moved_bit, moved_bit] = 1.0
    p_stay = np.eye(2, dtype=complex) - p_moved
    isometry = np.kron(p_moved, move_map) + np.kron(p_stay, stay_map)

    new_matrix = isometry @ state.matrix @ isometry.conj().T
    new_positions = stay + moved
    new_bits = tuple(b + (1 - moved_bit,) for b in state.bits) + tuple(
        b + (moved_bit,) for b in state.bits
    )
    return OpticalState(matrix=new_matrix, positions=new_positions, bits=new_bits)


def dephase_path_bit(state: OpticalState, stage_index: int) -> OpticalState:
    """Delete coherence between paths whose recorded bit for the given
    0-based stage differs (uncompensated walk-off on that stage)."""
    n = state.n_paths
    if any(len(b) <= stage_index for b in state.bits):
        raise ValueError(f"stage {stage_index} has not happened yet")
    full = state.matrix.copy().reshape(2, n, 2, n)
    for i in range(n):
        for j in range(n):
            if state.bits[i][stage_index] != state.bits[j][stage_index]:
                full[:, i, :, j] = 0.0
    return OpticalState(
        matrix=full.reshape(2 * n, 2 * n), positions=state.positions, bits=state.bits
    )


def run_displacer_sequence(
    pol_input: DensityMatrix,
    angles: tuple[float, ...],
    geometry: PathGeometry,
    dephase_stages: tuple[int, ...] = (),
) -> OpticalState:
    """The standard three-displacer realization of a measurement chain:
    rotate the polarization by each stage angle, then displace. Stages 1
    and 2 displace the second basis component (by dx along x, then dy
    along y); stage 3 displaces the first component by dX along x, which
    is what puts the last outcome's 0 branch on the far side of the layout.

    ``dephase_stages`` lists 1-based stages whose path coherence is
    deleted after the displacer (walk-off without compensation).
    """
    if len(angles) != 3:
        raise ValueError("the displacer sequence realizes exactly three stages")
    plan = (
        (geometry.dx, "x", np.diag([0.0, 1.0]).astype(complex)),
        (geometry.dy, "y", np.diag([0.0, 1.0]).astype(complex)),
        (geometry.dX, "x", np.diag([1.0, 0.0]).astype(complex)),
    )
    state = initial_optical_state(pol_input)
    for k, (theta, (delta, axis, projector)) in enumerate(zip(angles, plan), start=1):
        state = rotate_polarization(state, theta)
        state = apply_beam_displacer(state, delta, axis, projector)
        if k in dephase_stages:
            state = dephase_path_bit(state, k - 1)
    return state


def optical_joint_states(state: OpticalState) -> tuple[DensityMatrix, DensityMatrix]:
    """(polarization+readouts, readouts-only) states with paths reordered to
    the outcome bit-string order, for comparison against the abstract chain."""
    n = state.n_paths
    k = len(state.bits[0])
    if any(len(b) != k for b in state.bits) or n != 2 ** k:
        raise ValueError("path register does not hold a complete outcome record")
    order = sorted(range(n), key=lambda i: state.bits[i])
    full = state.matrix.reshape(2, n, 2, n)
    reordered = full[:, order][:, :, :, order].reshape(2 * n, 2 * n)
    with_pol = DensityMatrix(reordered, (2,) * (k + 1))
    pol_traced = np.trace(reordered.reshape(2, n, 2, n), axis1=0, axis2=2)
    return with_pol, DensityMatrix(pol_traced, (2,) * k)
