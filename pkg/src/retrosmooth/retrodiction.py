"""Joint outcome statistics, Bayesian retrodiction and smoothed states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvariantError, NumericError
from .measurement import (
    ZERO_PROB,
    MeasurementSet,
    OutcomeEnsemble,
    apply_nonselective,
    apply_selective,
)
from .qmat import dagger, hermitian_eigen, require_density

NEG_CLAMP = 1e-12
SUM_TOL = 1e-9
RENORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Table ``p_ym[y, m]`` of second-outcome ``y`` and first-outcome ``m``."""

    p_ym: np.ndarray
    labels_m: tuple = ()
    labels_y: tuple = ()

    def __post_init__(self):
        p = np.array(self.p_ym, dtype=float)
        if p.ndim != 2:
            raise DimensionError("joint table must be 2-D (y, m)")
        if p.min() < -NEG_CLAMP:
            raise InvariantError(f"negative joint probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise InvariantError(f"joint probabilities sum to {p.sum():.12g}")
        p.setflags(write=False)
        object.__setattr__(self, "p_ym", p)
        if not self.labels_m:
            object.__setattr__(self, "labels_m", tuple(str(i) for i in range(p.shape[1])))
        if not self.labels_y:
            object.__setattr__(self, "labels_y", tuple(str(i) for i in range(p.shape[0])))

    @property
    def p_m(self) -> np.ndarray:
        return self.p_ym.sum(axis=0)

    @property
    def p_y(self) -> np.ndarray:
        return self.p_ym.sum(axis=1)

    def p_y_given_m(self) -> np.ndarray:
        """Forward conditionals, indexed ``[y, m]``; zero columns for unreachable m."""
        pm = self.p_m
        out = np.zeros_like(self.p_ym)
        ok = pm > ZERO_PROB
        out[:, ok] = self.p_ym[:, ok] / pm[ok]
        return out

    @classmethod
    def product(cls, p_y, p_m) -> "JointDistribution":
        return cls(np.outer(p_y, p_m))


def joint_distribution(rho, first: MeasurementSet, second: MeasurementSet) -> JointDistribution:
    """``p(y, m) = Tr[Omega_m rho Omega_m^dag M_y^dag M_y]``."""
    rho = require_density(rho)
    if not (rho.shape[0] == first.dim == second.dim):
        raise DimensionError("state and measurement dimensions differ")
    posts = [op @ rho @ dagger(op) for op in first.operators]
    effects = second.effects()
    table = np.array(
        [[np.real(np.trace(post @ e)) for post in posts] for e in effects]
    )
    return JointDistribution(table, first.labels, second.labels)


def retrodict(joint: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Bayes inversion: ``p(m|y) = p(y, m) / p(y)``.

    Returns the table indexed ``[m, y]`` (each reachable column sums to one)
    and ``p(y)``. Columns with ``p(y) < 1e-14`` are left at zero.
    """
    p_y = joint.p_y
    table = np.zeros((joint.p_ym.shape[1], joint.p_ym.shape[0]))
    for y, py in enumerate(p_y):
        if py < ZERO_PROB:
            continue
        col = joint.p_ym[y] / py
        s = col.sum()
        if abs(s - 1.0) > RENORM_TOL:
            raise NumericError(f"retrodicted column {y} sums to {s:.12g}")
        table[:, y] = col / s
    return table, p_y


def smoothed_states(ensemble: OutcomeEnsemble, p_m_given_y: np.ndarray) -> list[np.ndarray]:
    """``rho_y = sum_m p(m|y) rho_m`` for every column of the table."""
    n_m = len(ensemble.states)
    if p_m_given_y.shape[0] != n_m:
        raise DimensionError(
            f"conditional table has {p_m_given_y.shape[0]} rows, ensemble has {n_m} outcomes"
        )
    dim = ensemble.states[0].shape[0]
    out = []
    for y in range(p_m_given_y.shape[1]):
        col = p_m_given_y[:, y]
        if not col.any():
            out.append(np.eye(dim, dtype=complex) / dim)
            continue
        out.append(sum(w * s for w, s in zip(col, ensemble.states) if w != 0.0))
    return out


@dataclass(frozen=True, eq=False)
class SmoothingResult:
    joint: JointDistribution
    ensemble: OutcomeEnsemble
    p_m_given_y: np.ndarray
    p_y: np.ndarray
    smoothed_states: list = field(repr=False)
    average_state: np.ndarray = field(repr=False)
    nonselective_state: np.ndarray = field(repr=False)
    weights_w: np.ndarray = field(repr=False)

    @property
    def p_m(self) -> np.ndarray:
        return self.ensemble.probabilities

    @property
    def unreachable_y(self) -> tuple:
        return tuple(bool(p < ZERO_PROB) for p in self.p_y)


def smooth(rho, first: MeasurementSet, second: MeasurementSet) -> SmoothingResult:
    """Run the two-measurement retrodiction pipeline end to end."""
    rho = require_density(rho)
    joint = joint_distribution(rho, first, second)
    ensemble = apply_selective(rho, first)
    table, p_y = retrodict(joint)
    states = smoothed_states(ensemble, table)
    average = sum(py * s for py, s in zip(p_y, states) if py >= ZERO_PROB)
    p_m = ensemble.probabilities
    w = np.zeros_like(table)
    ok = p_m > ZERO_PROB
    w[ok, :] = table[ok, :] / p_m[ok, None]
    return SmoothingResult(
        joint=joint,
        ensemble=ensemble,
        p_m_given_y=table,
        p_y=p_y,
        smoothed_states=states,
        average_state=average,
        nonselective_state=apply_nonselective(rho, first),
        weights_w=w,
    )


@dataclass(frozen=True, eq=False)
class PastQuantumState:
    """Pair ``(rho, E)`` of a state and a future effect operator."""

    rho: np.ndarray
    effect: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.effect, dtype=complex)
        vals, _ = hermitian_eigen(e)
        if vals[0] < -1e-10 or vals[-1] > 1 + 1e-10:
            raise InvariantError("effect eigenvalues must lie in [0, 1]")
        object.__setattr__(self, "rho", require_density(self.rho))
        object.__setattr__(self, "effect", e)

    def retrodicted(self, first: MeasurementSet) -> np.ndarray:
        """``p(m | y)`` for the effect ``E = M_y^dag M_y`` of one outcome."""
        num = np.array(
            [np.real(np.trace(op @ self.rho @ dagger(op) @ self.effect)) for op in first.operators]
        )
        total = num.sum()
        if total < ZERO_PROB:
            raise NumericError("effect has zero probability under this state")
        return num / total
