"""Kraus measurement sets, state updates and the Gaussian qubit measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, InvariantError, NumericError
from .qmat import as_cmatrix, dagger, hermitian_eigen, require_density

COMPLETENESS_TOL = 1e-9
ZERO_PROB = 1e-14
MIN_STRENGTH = 1e-3


def completeness_defect(operators: Sequence[np.ndarray]) -> float:
    dim = operators[0].shape[0]
    total = sum(dagger(op) @ op for op in operators)
    return float(np.max(np.abs(total - np.eye(dim))))


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Ordered Kraus operators ``{Omega_m}`` with ``sum Omega^dag Omega = I``.

    Operators are kept exactly as given; labels default to ``"0", "1", ...``.
    """

    operators: tuple
    labels: tuple = ()

    def __post_init__(self):
        ops = tuple(as_cmatrix(op) for op in self.operators)
        if not ops:
            raise InvariantError("a measurement set needs at least one operator")
        dim = ops[0].shape[0]
        for op in ops:
            if op.shape != (dim, dim):
                raise DimensionError(f"operator shape {op.shape}, expected {(dim, dim)}")
        defect = completeness_defect(ops)
        if defect > COMPLETENESS_TOL:
            raise InvariantError(f"completeness violated (defect {defect:.3e})")
        labels = tuple(str(l) for l in self.labels) or tuple(str(i) for i in range(len(ops)))
        if len(labels) != len(ops):
            raise ValueError("one label per operator required")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def effects(self) -> list[np.ndarray]:
        """POVM elements ``Omega^dag Omega``."""
        return [dagger(op) @ op for op in self.operators]

    @classmethod
    def projective(cls, basis, labels=()) -> "MeasurementSet":
        """Rank-one projectors onto the columns of ``basis``."""
        basis = as_cmatrix(basis)
        ops = [np.outer(basis[:, k], basis[:, k].conj()) for k in range(basis.shape[1])]
        return cls(tuple(ops), tuple(labels))


@dataclass(frozen=True, eq=False)
class OutcomeEnsemble:
    """Selective-measurement output: one (probability, state) per outcome.

    Outcomes with ``p < 1e-14`` are flagged in ``unreachable`` and carry the
    maximally mixed state as a placeholder.
    """

    probabilities: np.ndarray
    states: list = field(repr=False)
    labels: tuple = ()
    unreachable: tuple = ()

    def reachable(self):
        return [k for k in range(len(self.states)) if not self.unreachable[k]]


def _check_dims(rho: np.ndarray, mset: MeasurementSet):
    if rho.shape[0] != mset.dim:
        raise DimensionError(
            f"state dimension {rho.shape[0]} does not match measurement dimension {mset.dim}"
        )


def apply_selective(rho, mset: MeasurementSet) -> OutcomeEnsemble:
    rho = require_density(rho)
    _check_dims(rho, mset)
    dim = mset.dim
    probs, states, flags = [], [], []
    for op in mset.operators:
        post = op @ rho @ dagger(op)
        p = float(np.real(np.trace(post)))
        if p < ZERO_PROB:
            probs.append(max(p, 0.0))
            states.append(np.eye(dim, dtype=complex) / dim)
            flags.append(True)
        else:
            probs.append(p)
            states.append(post / p)
            flags.append(False)
    probs = np.array(probs)
    if abs(probs.sum() - 1.0) > COMPLETENESS_TOL:
        raise NumericError(f"outcome probabilities sum to {probs.sum():.12g}")
    return OutcomeEnsemble(probs, states, mset.labels, tuple(flags))


def apply_nonselective(rho, mset: MeasurementSet) -> np.ndarray:
    rho = require_density(rho)
    _check_dims(rho, mset)
    return sum(op @ rho @ dagger(op) for op in mset.operators)


@dataclass(frozen=True)
class GaussianMeasurement:
    """Kraus family ``Omega_V = (2 pi a^2)^(-1/4) exp(-(V - sigma_z)^2 / 4a^2)``."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"measurement strength must be positive, got {self.a}")
        if self.a < MIN_STRENGTH:
            raise DomainError(f"a = {self.a} below supported minimum {MIN_STRENGTH}")

    @property
    def norm(self) -> float:
        return 1.0 / math.sqrt(2.0 * math.pi * self.a**2)

    def kraus(self, v: float) -> np.ndarray:
        """Omega_V as an explicit diagonal matrix (used only by oracles)."""
        c = (2.0 * math.pi * self.a**2) ** -0.25
        four_a2 = 4.0 * self.a**2
        return np.diag([c * math.exp(-((v - 1) ** 2) / four_a2), c * math.exp(-((v + 1) ** 2) / four_a2)]).astype(complex)


def gaussian_unnormalized_post(rho, g: GaussianMeasurement, v: float) -> np.ndarray:
    """Closed form of ``Omega_V rho Omega_V^dag`` for the Gaussian family.

    Its trace is the outcome density ``p(V)``.
    """
    rho = as_cmatrix(rho)
    if rho.shape != (2, 2):
        raise DimensionError("Gaussian measurement acts on a qubit")
    two_a2 = 2.0 * g.a**2
    g_plus = math.exp(-((v - 1) ** 2) / two_a2)
    g_minus = math.exp(-((v + 1) ** 2) / two_a2)
    coh = math.exp(-(v * v + 1) / two_a2)
    out = np.array(
        [[rho[0, 0] * g_plus, rho[0, 1] * coh], [rho[1, 0] * coh, rho[1, 1] * g_minus]]
    )
    return g.norm * out


def gaussian_normalized_post(rho, g: GaussianMeasurement, v: float) -> np.ndarray:
    """Normalized ``rho_V`` computed in log space.

    Stays finite where ``p(V)`` underflows, as long as the outcome is
    reachable from some populated level.
    """
    rho = as_cmatrix(rho)
    p_plus, p_minus = float(np.real(rho[0, 0])), float(np.real(rho[1, 1]))
    two_a2 = 2.0 * g.a**2
    e_plus = -((v - 1) ** 2) / two_a2
    e_minus = -((v + 1) ** 2) / two_a2
    e_coh = 0.5 * (e_plus + e_minus)
    ref = max(e for e, p in ((e_plus, p_plus), (e_minus, p_minus)) if p > 0)
    w_plus = p_plus * math.exp(e_plus - ref)
    w_minus = p_minus * math.exp(e_minus - ref)
    c = rho[0, 1] * math.exp(e_coh - ref)
    total = w_plus + w_minus
    return np.array([[w_plus, c], [np.conj(c), w_minus]]) / total


def gaussian_nonselective(rho, g: GaussianMeasurement) -> np.ndarray:
    """Populations unchanged, coherences damped by ``exp(-1/2a^2)``."""
    rho = require_density(rho)
    if rho.shape != (2, 2):
        raise DimensionError("Gaussian measurement acts on a qubit")
    damp = math.exp(-1.0 / (2.0 * g.a**2))
    out = rho.copy()
    out[0, 1] *= damp
    out[1, 0] *= damp
    return out


def random_density(dim: int, seed: int) -> np.ndarray:
    """Full-rank state ``G G^dag / Tr`` from a seeded complex Ginibre matrix."""
    if dim < 2:
        raise DimensionError("random_density needs dim >= 2")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.real(np.trace(rho))


def random_measurement_set(dim: int, count: int, seed: int) -> MeasurementSet:
    """Random Kraus set ``Omega_k = G_k S^(-1/2)`` with ``S = sum G_k^dag G_k``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    gs = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(count)]
    s = sum(dagger(g) @ g for g in gs)
    vals, vecs = hermitian_eigen(s)
    if vals[0] <= 1e-12 * vals[-1]:
        raise NumericError("Gram sum is singular")
    s_inv_half = (vecs / np.sqrt(vals)) @ dagger(vecs)
    return MeasurementSet(tuple(g @ s_inv_half for g in gs))
