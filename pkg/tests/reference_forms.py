"""Closed-form expected matrices for the standard orthogonal sequences.

The engine's joint readout matrices are indexed by the outcome bit string
with the stage-1 bit most significant. The diagonal-input forms below are
written directly in that order. The rotated-input forms follow the
conventional display layout instead, which groups outcomes by the stage
whose record keeps the interesting coherence (the last stage for three
measurements, the second for two); ``ROTATED_DISPLAY_2`` and
``ROTATED_DISPLAY_3`` are the index permutations taking engine order to
that layout, so

    engine[np.ix_(ROTATED_DISPLAY_3, ROTATED_DISPLAY_3)] == expected form.
"""

import math

import numpy as np

# engine index e = 4*m1 + 2*m2 + m3 -> display position
ROTATED_DISPLAY_2 = [0, 2, 1, 3]
ROTATED_DISPLAY_3 = [1, 3, 5, 7, 0, 2, 4, 6]

XI_GRID_DEG = tuple(2.25 * k for k in range(11))
PHI_GRID = tuple(math.radians(2.0 * xi) for xi in XI_GRID_DEG)

_I2 = np.eye(2)
_Z = np.diag([1.0, -1.0])


def two_stage_diagonal(phi: float) -> np.ndarray:
    """Record after an aligned-then-orthogonal pair on the diagonal input:
    the first readout's marginal times a maximally mixed second readout."""
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    return 0.5 * np.diag([c2, c2, s2, s2]).astype(complex)


def three_stage_diagonal(phi: float) -> np.ndarray:
    """Amplitude-keeping record after three stages on the diagonal input."""
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    out = np.zeros((8, 8), dtype=complex)
    out[:4, :4] = np.block([[c2 * _I2, -c2 * _Z], [-c2 * _Z, c2 * _I2]])
    out[4:, 4:] = np.block([[s2 * _I2, s2 * _Z], [s2 * _Z, s2 * _I2]])
    return 0.25 * out


def collapse_three_diagonal(phi: float) -> np.ndarray:
    """Same sequence under collapse: fully diagonal record."""
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    return 0.25 * np.diag([c2] * 4 + [s2] * 4).astype(complex)


def two_stage_rotated(phi: float) -> np.ndarray:
    """Record after two stages on the rotated input, in the display layout
    grouped by the second readout's outcome. Both models predict this one."""
    c = math.cos(2 * phi)
    return 0.25 * np.array(
        [[1, c, 0, 0], [c, 1, 0, 0], [0, 0, 1, -c], [0, 0, -c, 1]], dtype=complex
    )


def three_stage_rotated(phi: float) -> np.ndarray:
    """Amplitude-keeping record after three stages on the rotated input, in
    the display layout grouped by the third readout's outcome."""
    c = math.cos(2 * phi)
    out = np.zeros((8, 8), dtype=complex)
    out[:4, :4] = np.array(
        [[1, 1, c, -c], [1, 1, c, -c], [c, c, 1, -1], [-c, -c, -1, 1]]
    )
    out[4:, 4:] = np.array(
        [[1, -1, c, c], [-1, 1, -c, -c], [c, -c, 1, 1], [c, -c, 1, 1]]
    )
    return 0.125 * out


def max_dev(a, b) -> float:
    a = a.matrix if hasattr(a, "matrix") else a
    b = b.matrix if hasattr(b, "matrix") else b
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Full-rank random state (Ginibre construction)."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
