"""Dense complex linear algebra and quantum-state primitives.

Everything here operates on small dense matrices (the largest state in this
package is 2^5 = 32 dimensional), so exactness and simplicity win over any
kind of sparse or accelerated backend.

Conventions fixed once for the whole package:

* density matrices are trace 1 within ``TRACE_ATOL``, Hermitian within
  ``HERMITICITY_ATOL``, and positive semidefinite down to ``EIGENVALUE_FLOOR``;
* entropies are in bits (base-2 logarithms), with eigenvalues below
  ``ENTROPY_EIGENVALUE_CUTOFF`` treated as exact zeros;
* comparisons against closed-form expected matrices use ``CLOSED_FORM_ATOL``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TRACE_ATOL = 1e-12
HERMITICITY_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
ENTROPY_EIGENVALUE_CUTOFF = 1e-12
CLOSED_FORM_ATOL = 1e-10

IDENTITY = np.eye(2, dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def as_complex_matrix(m) -> np.ndarray:
    """Coerce input to a 2-D complex ndarray without copying when possible."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def matrices_close(a, b, atol: float) -> bool:
    """Element-wise equality with an explicit absolute tolerance."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(a - b)) <= atol)


@dataclass(frozen=True)
class ValidationReport:
    """Diagnostics for the density-matrix invariants.

    ``ok`` is True when all three invariants hold: trace within
    ``TRACE_ATOL`` of 1, Hermiticity within ``HERMITICITY_ATOL``, and minimum
    eigenvalue at or above ``EIGENVALUE_FLOOR``.
    """

    trace_deviation: float
    hermiticity_violation: float
    min_eigenvalue: float
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        status = "pass" if self.ok else "fail: " + "; ".join(self.problems)
        return (
            f"trace deviation {self.trace_deviation:.3e}, "
            f"hermiticity violation {self.hermiticity_violation:.3e}, "
            f"min eigenvalue {self.min_eigenvalue:.3e} -> {status}"
        )


def validate(rho) -> ValidationReport:
    """Check the density-matrix invariants; always returns a report."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    if m.shape[0] != m.shape[1]:
        return ValidationReport(
            trace_deviation=float("nan"),
            hermiticity_violation=float("nan"),
            min_eigenvalue=float("nan"),
            problems=(f"matrix is not square: shape {m.shape}",),
        )
    trace_dev = abs(np.trace(m) - 1.0)
    herm = float(np.max(np.abs(m - m.conj().T)))
    # Hermitize before the eigenvalue check so a tiny asymmetry does not
    # produce complex eigenvalues; the asymmetry itself is reported above.
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    min_eig = float(w[0])
    problems = []
    if trace_dev > TRACE_ATOL:
        problems.append(f"trace {np.trace(m).real!r} (deviation {trace_dev:.3e})")
    if herm > HERMITICITY_ATOL:
        problems.append(f"not Hermitian (violation {herm:.3e})")
    if min_eig < EIGENVALUE_FLOOR:
        problems.append(f"negative eigenvalue {min_eig:.3e}")
    return ValidationReport(
        trace_deviation=float(trace_dev),
        hermiticity_violation=herm,
        min_eigenvalue=min_eig,
        problems=tuple(problems),
    )


class DensityMatrix:
    """Immutable density matrix over an ordered list of subsystems.

    ``dims`` gives the local dimension of each subsystem; their product must
    equal the matrix dimension. Construction validates the state invariants
    and raises ``ValueError`` when they fail.
    """

    __slots__ = ("_matrix", "_dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        m = as_complex_matrix(matrix).copy()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if dims is None:
            dims = (m.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must each be >= 2, got {dims}")
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(
                f"product of dims {dims} does not match matrix dimension {m.shape[0]}"
            )
        report = validate(m)
        if not report.ok:
            raise ValueError(f"invalid density matrix: {report}")
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)
        object.__setattr__(self, "_dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return self._dims

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self._dims)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, dims={self._dims})"


def kron(a, b):
    """Kronecker product. DensityMatrix inputs produce a DensityMatrix."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    am = a.matrix if isinstance(a, DensityMatrix) else as_complex_matrix(a)
    bm = b.matrix if isinstance(b, DensityMatrix) else as_complex_matrix(b)
    return np.kron(am, bm)


def partial_trace_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix, keeping the listed subsystem indices."""
    dims = list(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"subsystem index out of range: keep={keep}, {len(dims)} subsystems")
    tensor = m.reshape(dims + dims)
    current = list(dims)
    removed = 0
    for i in range(len(dims)):
        if i in keep:
            continue
        axis = i - removed
        tensor = np.trace(tensor, axis1=axis, axis2=axis + len(current))
        current.pop(axis)
        tensor = tensor.reshape(current + current)
        removed += 1
    d = int(np.prod(current))
    return tensor.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep`` (original order kept)."""
    keep = sorted(set(int(k) for k in keep))
    reduced = partial_trace_matrix(rho.matrix, rho.dims, keep)
    return DensityMatrix(reduced, tuple(rho.dims[i] for i in keep))


def dephase_matrix(m: np.ndarray, dims: Sequence[int], subsystem: int) -> np.ndarray:
    """Zero all elements off-diagonal in the chosen subsystem's basis."""
    dims = list(dims)
    if subsystem < 0 or subsystem >= len(dims):
        raise ValueError(f"subsystem index {subsystem} out of range for dims {dims}")
    pre = int(np.prod(dims[:subsystem], dtype=int))
    d = dims[subsystem]
    post = int(np.prod(dims[subsystem + 1 :], dtype=int))
    t = m.reshape(pre, d, post, pre, d, post).copy()
    for i in range(d):
        for j in range(d):
            if i != j:
                t[:, i, :, :, j, :] = 0
    return t.reshape(m.shape)


def dephase(rho: DensityMatrix, subsystem: int) -> DensityMatrix:
    """Complete dephasing channel on one subsystem (computational basis).

    Equivalent to the Kraus sum (1/2)(rho + Z rho Z) on that subsystem for
    qubits; preserves the trace, the diagonal, and Hermiticity.
    """
    return DensityMatrix(dephase_matrix(rho.matrix, rho.dims, subsystem), rho.dims)


def purity(rho) -> float:
    """Tr(rho^2), real within 1e-12 imaginary residue."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    value = np.trace(m @ m)
    if abs(value.imag) > 1e-12:
        raise ValueError(f"purity has imaginary residue {value.imag:.3e}")
    return float(value.real)


def von_neumann_entropy(rho) -> float:
    """Entropy in bits: -sum(lambda log2 lambda), 0 log 0 = 0.

    Eigenvalues below ``ENTROPY_EIGENVALUE_CUTOFF`` are treated as exact
    zeros; values in [EIGENVALUE_FLOOR, 0) are numerical drift and clamp to 0.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    w = w[w > ENTROPY_EIGENVALUE_CUTOFF]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))


def purify(rho: DensityMatrix) -> np.ndarray:
    """State vector purification against a same-dimension mirror system.

    Returns a vector on (system, reference) with the reference dimension equal
    to the system dimension. Any purification gives identical results for the
    operations in this package as long as the reference is never touched.
    """
    w, v = np.linalg.eigh(rho.matrix)
    w = np.clip(w, 0.0, None)
    d = rho.dim
    psi = np.zeros(d * d, dtype=complex)
    basis = np.eye(d)
    for i in range(d):
        if w[i] > 0:
            psi += np.sqrt(w[i]) * np.kron(v[:, i], basis[i])
    return psi


# ---------------------------------------------------------------------------
# Serialization: JSON dict {dims, re, im} (row-major) and a CSV form whose
# cells are quoted "re,im" pairs. Both round-trip bit-exactly because floats
# are rendered with repr (shortest exact representation).
# ---------------------------------------------------------------------------

def matrix_to_json_dict(m, dims: Sequence[int] | None = None) -> dict:
    if isinstance(m, DensityMatrix):
        dims = m.dims
        m = m.matrix
    m = as_complex_matrix(m)
    if dims is None:
        dims = (m.shape[0],)
    flat = m.reshape(-1)
    return {
        "dims": [int(d) for d in dims],
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json_dict(doc: dict) -> tuple[np.ndarray, tuple[int, ...]]:
    dims = tuple(int(d) for d in doc["dims"])
    d = int(np.prod(dims))
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc["im"], dtype=float)
    if re.size != d * d or im.size != d * d:
        raise ValueError(f"entry count {re.size} does not match dims {dims}")
    return (re + 1j * im).reshape(d, d), dims


def density_matrix_from_json_dict(doc: dict) -> DensityMatrix:
    m, dims = matrix_from_json_dict(doc)
    return DensityMatrix(m, dims)


def matrix_to_csv(m, dims: Sequence[int] | None = None) -> str:
    """CSV text: first line records dims, then one row per matrix row with
    quoted "re,im" cells."""
    if isinstance(m, DensityMatrix):
        dims = m.dims
        m = m.matrix
    m = as_complex_matrix(m)
    if dims is None:
        dims = (m.shape[0],)
    out = io.StringIO()
    out.write("# dims: " + ",".join(str(int(d)) for d in dims) + "\n")
    for row in m:
        out.write(",".join(f'"{float(x.real)!r},{float(x.imag)!r}"' for x in row) + "\n")
    return out.getvalue()


def matrix_from_csv(text: str) -> tuple[np.ndarray, tuple[int, ...]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# dims:"):
        raise ValueError("missing dims header line")
    dims = tuple(int(x) for x in lines[0].split(":", 1)[1].split(","))
    rows = []
    for line in lines[1:]:
        cells = line.split('","')
        cells[0] = cells[0].lstrip('"')
        cells[-1] = cells[-1].rstrip('"')
        rows.append([complex(float(c.split(",")[0]), float(c.split(",")[1])) for c in cells])
    m = np.array(rows, dtype=complex)
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    return m, dims
