"""The qubit Gaussian retrodiction model and the hybrid quantum-classical model.

Qubit model: a Gaussian first measurement of strength ``a`` on sigma_z
followed by a projective measurement along the direction ``(theta, phi)``.
Continuous integrals over the outcome ``V`` go through
:func:`retrosmooth.quadrature.quad_integrate`.

Hybrid model: a qubit A tagged by a classical register B; the register is
read first (projectively) and a photon-detection-like measurement acts on A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvariantError
from .infotheory import (
    INEQUALITY_TOL,
    ProjectiveBipartiteReport,
    ge,
    lift_to_a,
    projective_bipartite_report,
    projector_on_b,
    von_neumann_entropy,
)
from .measurement import (
    MIN_STRENGTH,
    ZERO_PROB,
    GaussianMeasurement,
    MeasurementSet,
    gaussian_nonselective,
)
from .qmat import BipartiteDims, BlochVector, bloch_to_density, kron
from .quadrature import QuadratureSpec, quad_integrate

ROW_SLACK = 1e-6


@dataclass(frozen=True)
class QubitGaussianConfig:
    initial: BlochVector
    a: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.a >= MIN_STRENGTH:
            raise DomainError(f"a must be >= {MIN_STRENGTH}, got {self.a}")

    @property
    def rho(self) -> np.ndarray:
        return bloch_to_density(self.initial)

    @property
    def measurement(self) -> GaussianMeasurement:
        return GaussianMeasurement(self.a)


def direction_states(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``|n_+>, |n_->`` along the Bloch direction ``(theta, phi)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ph = complex(math.cos(phi), -math.sin(phi))
    return np.array([c, s * ph]), np.array([-s, c * ph])


def qubit_second_measurement(theta: float, phi: float) -> MeasurementSet:
    n_plus, n_minus = direction_states(theta, phi)
    return MeasurementSet.projective(np.column_stack([n_plus, n_minus]), labels=("+", "-"))


def _gaussian_terms(config: QubitGaussianConfig, v: np.ndarray):
    """Unnormalized ``rho~_V`` entries (t00, t11, t01) on an array of V."""
    rho = config.rho
    a2 = 2.0 * config.a**2
    norm = 1.0 / math.sqrt(math.pi * a2)
    t00 = norm * rho[0, 0].real * np.exp(-((v - 1) ** 2) / a2)
    t11 = norm * rho[1, 1].real * np.exp(-((v + 1) ** 2) / a2)
    t01 = norm * rho[0, 1] * np.exp(-(v * v + 1) / a2)
    return t00, t11, t01


def _cross(config: QubitGaussianConfig, t01) -> np.ndarray:
    """``sin(theta) Re[e^{-i phi} t01]``, the interference part of ``p(+-, V)``."""
    return math.sin(config.theta) * np.real(np.exp(-1j * config.phi) * t01)


def qubit_joint_density(config: QubitGaussianConfig, v):
    """``p(+, V)`` and ``p(-, V)`` from the closed form.

    Two shifted Gaussians weighted by ``cos^2``/``sin^2`` of ``theta/2`` plus
    the coherence cross term. Accepts a scalar or an array of ``V``.
    """
    v_arr = np.asarray(v, dtype=float)
    t00, t11, t01 = _gaussian_terms(config, v_arr)
    c2, s2 = math.cos(config.theta / 2) ** 2, math.sin(config.theta / 2) ** 2
    cross = _cross(config, t01)
    p_plus = c2 * t00 + s2 * t11 + cross
    p_minus = s2 * t00 + c2 * t11 - cross
    if v_arr.ndim == 0:
        return float(p_plus), float(p_minus)
    return p_plus, p_minus


def _normalized_entries(config: QubitGaussianConfig, v: np.ndarray):
    """``rho_V`` entries evaluated in log space (finite where p(V) underflows)."""
    rho = config.rho
    pp, pm = rho[0, 0].real, rho[1, 1].real
    a2 = 2.0 * config.a**2
    e_plus = -((v - 1) ** 2) / a2
    e_minus = -((v + 1) ** 2) / a2
    if pp > 0 and pm > 0:
        ref = np.maximum(e_plus, e_minus)
    else:
        ref = e_plus if pp > 0 else e_minus
    w_plus = pp * np.exp(e_plus - ref)
    w_minus = pm * np.exp(e_minus - ref)
    coh = rho[0, 1] * np.exp(0.5 * (e_plus + e_minus) - ref)
    total = w_plus + w_minus
    return w_plus / total, w_minus / total, coh / total


def _qubit_entropy(r00, r11, r01) -> np.ndarray:
    radius = np.sqrt((r00 - r11) ** 2 + 4 * np.abs(r01) ** 2)
    lam = np.clip(np.stack([0.5 * (1 + radius), 0.5 * (1 - radius)]), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log(lam), 0.0)
    return terms.sum(axis=0)


def _integrand(config: QubitGaussianConfig):
    def f(v):
        t00, t11, t01 = _gaussian_terms(config, v)
        p_v = t00 + t11
        p_plus, p_minus = qubit_joint_density(config, v)
        r00, r11, r01 = _normalized_entries(config, v)
        s_v = _qubit_entropy(r00, r11, r01)
        with np.errstate(divide="ignore", invalid="ignore"):
            diff_h = np.where(p_v > 0, -p_v * np.log(p_v), 0.0)
        cols = [p_v, p_plus, p_minus]
        for p in (p_plus, p_minus):
            cols += [p * r00, p * r11, p * r01.real, p * r01.imag]
        cols += [v * p_v, v * p_plus, v * p_minus, p_v * s_v, diff_h]
        return np.stack(cols, axis=1)

    return f


@dataclass(frozen=True)
class QubitIntegrals:
    """Everything the qubit model needs from a single adaptive pass over V."""

    config: QubitGaussianConfig
    p_total: float
    p_plus: float
    p_minus: float
    rho_plus: np.ndarray = field(repr=False)
    rho_minus: np.ndarray = field(repr=False)
    v_omega: float
    v_plus: float
    v_minus: float
    s_selective_avg: float
    differential_entropy: float
    error_estimate: float


def _breakpoints(a: float) -> list[float]:
    pts = []
    for centre in (-1.0, 0.0, 1.0):
        for k in (-4, -1, 0, 1, 4):
            pts.append(centre + k * a)
    return pts


def qubit_integrals(config: QubitGaussianConfig, spec: QuadratureSpec = QuadratureSpec()) -> QubitIntegrals:
    a, w = config.a, spec.truncation_width
    lo, hi = -1.0 - w * a, 1.0 + w * a
    vals, err = quad_integrate(_integrand(config), lo, hi, spec, breakpoints=_breakpoints(a))
    p_total, p_plus, p_minus = vals[0], vals[1], vals[2]

    def state(offset, p):
        if p < ZERO_PROB:
            return np.eye(2, dtype=complex) / 2
        r00, r11, re, im = vals[offset: offset + 4] / p
        return np.array([[r00, re + 1j * im], [re - 1j * im, r11]])

    return QubitIntegrals(
        config=config,
        p_total=float(p_total),
        p_plus=float(p_plus),
        p_minus=float(p_minus),
        rho_plus=state(3, p_plus),
        rho_minus=state(7, p_minus),
        v_omega=float(vals[11]),
        v_plus=float(vals[12] / p_plus) if p_plus >= ZERO_PROB else float("nan"),
        v_minus=float(vals[13] / p_minus) if p_minus >= ZERO_PROB else float("nan"),
        s_selective_avg=float(vals[14]),
        differential_entropy=float(vals[15]),
        error_estimate=float(np.max(err)),
    )


def qubit_smoothed(config: QubitGaussianConfig, spec: QuadratureSpec = QuadratureSpec()):
    """Smoothed states ``rho_+-`` and the outcome probabilities ``p(+-)``."""
    q = qubit_integrals(config, spec)
    return q.rho_plus, q.rho_minus, q.p_plus, q.p_minus


def weak_values(config: QubitGaussianConfig, spec: QuadratureSpec = QuadratureSpec()):
    """``(<V_Omega>, <V_+>, <V_->, S[rho_+], S[rho_-])``."""
    q = qubit_integrals(config, spec)
    return (
        q.v_omega,
        q.v_plus,
        q.v_minus,
        von_neumann_entropy(q.rho_plus),
        von_neumann_entropy(q.rho_minus),
    )


def qubit_row(config: QubitGaussianConfig, spec: QuadratureSpec = QuadratureSpec()) -> dict:
    """One grid point of the qubit model: entropies, weak values and checks."""
    q = qubit_integrals(config, spec)
    s_nonsel = von_neumann_entropy(gaussian_nonselective(config.rho, config.measurement))
    s_plus = von_neumann_entropy(q.rho_plus)
    s_minus = von_neumann_entropy(q.rho_minus)
    s_retro = sum(p * s for p, s in ((q.p_plus, s_plus), (q.p_minus, s_minus)) if p >= ZERO_PROB)
    h_y = -sum(p * math.log(p) for p in (q.p_plus, q.p_minus) if p > 0)
    checks = [
        ge("central_upper", s_nonsel, s_retro, "qubit model"),
        ge("central_lower", s_retro, q.s_selective_avg, "qubit model"),
        ge("hy_upper_bound", h_y, s_nonsel - s_retro, "qubit model"),
    ]
    return {
        "a": config.a,
        "theta": config.theta,
        "phi": config.phi,
        "s_nonselective": s_nonsel,
        "s_retro_avg": s_retro,
        "s_selective_avg": q.s_selective_avg,
        "s_initial": von_neumann_entropy(config.rho),
        "v_omega": q.v_omega,
        "v_plus": q.v_plus,
        "v_minus": q.v_minus,
        "s_rho_plus": s_plus,
        "s_rho_minus": s_minus,
        "p_plus": q.p_plus,
        "p_minus": q.p_minus,
        "h_y": h_y,
        # differential-entropy analogue of H[m]; reported, not asserted
        "differential_lower_gap": q.differential_entropy - (s_retro - q.s_selective_avg),
        "sandwich_ok": all(c.margin >= -ROW_SLACK for c in checks[:2]),
        "checks": checks,
    }


def qubit_entropy_curves(configs, spec: QuadratureSpec = QuadratureSpec()) -> list[dict]:
    """Rows ``a, S[rho_Omega], sum p S[rho_+-], int p S[rho_V], S[rho_I]`` per config."""
    rows = [qubit_row(c, spec) for c in configs]
    bad = [r["a"] for r in rows if not r["sandwich_ok"]]
    if bad:
        raise InvariantError(f"entropy sandwich violated beyond {ROW_SLACK} at a = {bad}")
    return rows


def log_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def weak_value_onset(initial: BlochVector, theta: float, phi: float, a_grid,
                     spec: QuadratureSpec = QuadratureSpec(), tol: float = 1e-4):
    """Smallest ``a`` on (or bisected from) the grid with ``max |<V_+->| > 1``.

    Returns ``None`` when no grid point is anomalous.
    """

    def anomalous(a):
        q = qubit_integrals(QubitGaussianConfig(initial, a, theta, phi), spec)
        return max(abs(q.v_plus), abs(q.v_minus)) > 1.0

    grid = sorted(a_grid)
    prev = None
    for a in grid:
        if anomalous(a):
            if prev is None:
                return a
            lo, hi = prev, a
            while hi - lo > tol * hi:
                mid = math.sqrt(lo * hi)
                if anomalous(mid):
                    hi = mid
                else:
                    lo = mid
            return hi
        prev = a
    return None


@dataclass(frozen=True)
class HybridConfig:
    weights: tuple
    bloch_states: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) < 2 or len(w) != len(self.bloch_states):
            raise InvariantError("need matching weights and Bloch states, at least two of each")
        if w.min() < 0 or abs(w.sum() - 1.0) > 1e-12:
            raise InvariantError("weights must be non-negative and sum to one")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "bloch_states", tuple(self.bloch_states))

    @classmethod
    def two_state(cls, q: float, first: BlochVector, second: BlochVector) -> "HybridConfig":
        return cls((q, 1.0 - q), (first, second))

    @property
    def count(self) -> int:
        return len(self.weights)


FIG4_STATES = (BlochVector(0.0, 0.0, 0.0), BlochVector(1.0, 0.0, 0.0))


def photon_detection() -> MeasurementSet:
    """``M_+ = |-><+|`` (photon seen) and ``M_- = |-><-|`` on the qubit."""
    m_plus = np.array([[0, 0], [1, 0]], dtype=complex)
    m_minus = np.array([[0, 0], [0, 1]], dtype=complex)
    return MeasurementSet((m_plus, m_minus), ("+", "-"))


def hybrid_build(config: HybridConfig):
    """Initial state, dimensions and both measurement sets of the hybrid model."""
    n = config.count
    dims = BipartiteDims(2, n)
    register = np.eye(n, dtype=complex)
    rho_ab = sum(
        q * kron(bloch_to_density(b), np.outer(register[k], register[k]))
        for k, (q, b) in enumerate(zip(config.weights, config.bloch_states))
    )
    first = projector_on_b(register, dims)
    second = lift_to_a(photon_detection(), dims)
    return rho_ab, dims, first, second


def hybrid_report(config: HybridConfig) -> tuple[ProjectiveBipartiteReport, dict]:
    rho_ab, dims, _, _ = hybrid_build(config)
    report = projective_bipartite_report(rho_ab, dims, np.eye(config.count), photon_detection())
    row = {
        "s_a_nonsel": report.s_a_nonselective,
        "s_a_retro": report.s_a_retro_avg,
        "s_a_sel": report.s_a_selective_avg,
        "i_nonsel": report.i_nonselective,
        "i_retro": report.i_retro_avg,
        "i_sel": report.i_selective_avg,
        "holevo_chi": report.holevo_chi,
        "h_my": report.h_m_y,
    }
    return report, row


def hybrid_curve(q_values, first: BlochVector = FIG4_STATES[0], second: BlochVector = FIG4_STATES[1]):
    rows = []
    for q in q_values:
        report, row = hybrid_report(HybridConfig.two_state(float(q), first, second))
        if not report.satisfied:
            failing = [r.name for r in report.reports + report.identities if not r.satisfied]
            raise InvariantError(f"hybrid checks failed at q={q}: {failing}")
        rows.append({"q": float(q), **row})
    return rows

