"""Dense complex-matrix kernel and qubit/bipartite state primitives.

Matrices are plain ``numpy`` complex arrays. Bipartite operators use the
composite index ``i = i_a * dim_b + i_b`` throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DimensionError, DomainError, InvariantError, NumericError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-10
EIGEN_INPUT_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_cmatrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix has non-finite entries")
    return arr


def _square(m) -> np.ndarray:
    arr = as_cmatrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def hermitian_defect(m) -> float:
    arr = np.asarray(m)
    return float(np.max(np.abs(arr - dagger(arr)))) if arr.size else 0.0


def hermitian_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix.

    The input is symmetrized as ``(M + M^dagger)/2`` first, which removes the
    ~1e-13 asymmetry that quadrature sums pick up.

    Returns
    -------
    eigenvalues : ndarray of float, ascending
    eigenvectors : ndarray, columns are the orthonormal eigenvectors
    """
    arr = _square(m)
    defect = hermitian_defect(arr)
    if defect > EIGEN_INPUT_TOL:
        raise DomainError(f"matrix is not Hermitian (defect {defect:.3e})")
    sym = 0.5 * (arr + dagger(arr))
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    return vals, vecs


def clamped_spectrum(rho) -> np.ndarray:
    """Eigenvalues of a state with tiny negative values clamped to zero.

    Eigenvalues below ``-NEGATIVITY_TOL`` are an invariant violation.
    """
    vals, _ = hermitian_eigen(rho)
    if vals[0] < -NEGATIVITY_TOL:
        raise InvariantError(f"negative eigenvalue {vals[0]:.3e}")
    return np.clip(vals, 0.0, None)


def kron(a, b) -> np.ndarray:
    return np.kron(as_cmatrix(a), as_cmatrix(b))


@dataclass(frozen=True)
class BipartiteDims:
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError("subsystem dimensions must be positive")

    @property
    def total(self) -> int:
        return self.dim_a * self.dim_b


def partial_trace(rho_ab, dims: BipartiteDims, keep: Literal["A", "B"] = "A") -> np.ndarray:
    """Reduced operator of subsystem ``keep``.

    Works on any square operator of size ``dim_a * dim_b``; the result is a
    density matrix whenever the input is.
    """
    arr = _square(rho_ab)
    if arr.shape[0] != dims.total:
        raise DimensionError(
            f"operator has dimension {arr.shape[0]}, dims imply {dims.total}"
        )
    t = arr.reshape(dims.dim_a, dims.dim_b, dims.dim_a, dims.dim_b)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def reduce_to(rho, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    """Trace out every factor of a multipartite operator not listed in ``keep``."""
    arr = _square(rho)
    n = len(dims)
    if arr.shape[0] != int(np.prod(dims)):
        raise DimensionError(f"operator dimension {arr.shape[0]} does not match {dims}")
    keep = tuple(sorted(keep))
    t = arr.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = [rows[k] if k not in keep else letters[n + k].upper() for k in range(n)]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


@dataclass(frozen=True)
class BlochVector:
    """Qubit state in spherical Bloch coordinates (radius, polar, azimuth)."""

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise DomainError(f"Bloch radius must lie in [0, 1], got {self.r}")

    @property
    def cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return self.r * np.array(
            [st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)]
        )


def bloch_to_density(b: BlochVector) -> np.ndarray:
    """rho = (I + r n.sigma)/2 with n = (sin t cos p, sin t sin p, cos t)."""
    x, y, z = b.cartesian
    return 0.5 * (IDENTITY_2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def density_to_bloch(rho) -> BlochVector:
    arr = _square(rho)
    if arr.shape[0] != 2:
        raise DimensionError("Bloch coordinates exist only for qubits")
    x = float(np.real(np.trace(arr @ SIGMA_X)))
    y = float(np.real(np.trace(arr @ SIGMA_Y)))
    z = float(np.real(np.trace(arr @ SIGMA_Z)))
    r = float(np.sqrt(x * x + y * y + z * z))
    if r == 0.0:
        return BlochVector(0.0, 0.0, 0.0)
    # atan2 stays accurate near the poles where arccos(z/r) does not
    theta = float(np.arctan2(np.hypot(x, y), z))
    phi = float(np.arctan2(y, x)) % (2 * np.pi)
    return BlochVector(min(r, 1.0), theta, phi)


@dataclass(frozen=True)
class Violation:
    invariant: Literal["hermitian", "trace", "negativity"]
    defect: float


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix. Use :func:`validate_density` to build one."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def validate_density(m) -> DensityMatrix | list[Violation]:
    """Check the three density-matrix invariants.

    Returns a read-only :class:`DensityMatrix` when all hold, otherwise the
    list of violations with their numeric defects (signed for the trace and
    negativity checks).
    """
    arr = _square(m)
    violations = []
    herm = hermitian_defect(arr)
    if herm > HERMITIAN_TOL:
        violations.append(Violation("hermitian", herm))
    tr_defect = float(np.real(np.trace(arr))) - 1.0
    if abs(tr_defect) > TRACE_TOL:
        violations.append(Violation("trace", tr_defect))
    if herm <= EIGEN_INPUT_TOL:
        lowest = float(hermitian_eigen(arr)[0][0])
        if lowest < -NEGATIVITY_TOL:
            violations.append(Violation("negativity", lowest))
    if violations:
        return violations
    frozen = arr.copy()
    frozen.setflags(write=False)
    return DensityMatrix(frozen)


def require_density(m) -> np.ndarray:
    """Return ``m`` as an array, raising :class:`InvariantError` if invalid."""
    checked = validate_density(m)
    if isinstance(checked, list):
        detail = ", ".join(f"{v.invariant}={v.defect:.3e}" for v in checked)
        raise InvariantError(f"not a density matrix: {detail}")
    return checked.matrix


def trace_distance(a, b) -> float:
    vals = np.linalg.eigvalsh(0.5 * ((a - b) + dagger(a - b)))
    return 0.5 * float(np.sum(np.abs(vals)))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with R's phases removed."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
