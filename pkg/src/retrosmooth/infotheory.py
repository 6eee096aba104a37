"""Entropies, mutual informations and the inequality reports built on them.

All quantities are in nats. Every inequality is oriented as ``lhs >= rhs``
and reported through :class:`InequalityReport`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError, InvariantError, PreconditionError
from .measurement import ZERO_PROB, MeasurementSet
from .qmat import (
    BipartiteDims,
    clamped_spectrum,
    dagger,
    kron,
    partial_trace,
    reduce_to,
)
from .retrodiction import JointDistribution, SmoothingResult, smooth

INEQUALITY_TOL = 1e-8
MAX_TRIPARTITE_DIM = 64


def von_neumann_entropy(rho) -> float:
    """``S = -Tr[rho ln rho]`` from the clamped spectrum, with ``0 ln 0 = 0``."""
    lam = clamped_spectrum(np.asarray(rho))
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    if p.size and p.min() < -1e-12:
        raise InvariantError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvariantError(f"probabilities sum to {p.sum():.12g}")
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def joint_shannon(joint: JointDistribution) -> float:
    return shannon_entropy(joint.p_ym)


def conditional_shannon(joint: JointDistribution) -> float:
    """``H[m|y] = -sum_y p(y) sum_m p(m|y) ln p(m|y)``."""
    total = 0.0
    for row, py in zip(joint.p_ym, joint.p_y):
        if py < ZERO_PROB:
            continue
        cond = row[row > 0] / py
        total -= py * float(np.sum(cond * np.log(cond)))
    return total


def classical_mutual(joint: JointDistribution) -> float:
    """``H[m:y] = H[m] + H[y] - H[m,y]``."""
    return shannon_entropy(joint.p_m) + shannon_entropy(joint.p_y) - joint_shannon(joint)


def quantum_mutual(rho_ab, dims: BipartiteDims) -> float:
    rho_ab = np.asarray(rho_ab)
    if rho_ab.shape[0] != dims.total:
        raise DimensionError(f"state dimension {rho_ab.shape[0]} does not match {dims}")
    return (
        von_neumann_entropy(partial_trace(rho_ab, dims, "A"))
        + von_neumann_entropy(partial_trace(rho_ab, dims, "B"))
        - von_neumann_entropy(rho_ab)
    )


def average_entropy(probs, states) -> float:
    """``sum_k p_k S[rho_k]`` skipping outcomes with ``p_k < 1e-14``."""
    return sum(p * von_neumann_entropy(s) for p, s in zip(probs, states) if p >= ZERO_PROB)


def holevo_chi(probs, states) -> float:
    """``chi = S[sum p rho] - sum p S[rho]``."""
    probs = np.asarray(probs, dtype=float)
    if len(probs) != len(states):
        raise DimensionError("one probability per state required")
    dims = {np.asarray(s).shape for s in states}
    if len(dims) != 1:
        raise DimensionError(f"states have differing shapes {dims}")
    mix = sum(p * np.asarray(s) for p, s in zip(probs, states))
    return von_neumann_entropy(mix) - average_entropy(probs, states)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    satisfied: bool
    context: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def ge(name: str, lhs: float, rhs: float, context: str = "") -> InequalityReport:
    """Report for ``lhs >= rhs``."""
    margin = float(lhs) - float(rhs)
    return InequalityReport(name, float(lhs), float(rhs), margin, margin >= -INEQUALITY_TOL, context)


def identity(name: str, lhs: float, rhs: float, context: str = "") -> list[InequalityReport]:
    """An equality as its two one-sided reports ``name:ge`` and ``name:le``."""
    return [ge(name + ":ge", lhs, rhs, context), ge(name + ":le", rhs, lhs, context)]


@dataclass(frozen=True)
class CentralReport:
    s_nonselective: float
    s_retro_avg: float
    s_selective_avg: float
    h_y: float
    h_m: float
    reports: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.reports)


def sandwich_reports(s_nonsel, s_retro, s_sel, h_y, h_m, tag="", context="") -> list[InequalityReport]:
    suffix = f"[{tag}]" if tag else ""
    return [
        ge("central_upper" + suffix, s_nonsel, s_retro, context),
        ge("central_lower" + suffix, s_retro, s_sel, context),
        ge("hy_upper_bound" + suffix, h_y, s_nonsel - s_retro, context),
        ge("lower_bound" + suffix, h_m, s_retro - s_sel, context),
    ]


def _sandwich_values(result: SmoothingResult, reduce=None):
    r = reduce or (lambda s: s)
    s_nonsel = von_neumann_entropy(r(result.nonselective_state))
    s_retro = average_entropy(result.p_y, [r(s) for s in result.smoothed_states])
    s_sel = average_entropy(result.p_m, [r(s) for s in result.ensemble.states])
    return s_nonsel, s_retro, s_sel


def central_report(rho, first: MeasurementSet, second: MeasurementSet, dims: BipartiteDims | None = None,
                   result: SmoothingResult | None = None) -> CentralReport:
    """Entropy sandwich and both Shannon gap bounds for one configuration.

    With ``dims`` the same four inequalities are also reported for each
    subsystem (tags ``A`` and ``B``).
    """
    result = result or smooth(rho, first, second)
    h_y = shannon_entropy(result.p_y)
    h_m = shannon_entropy(result.p_m)
    s_nonsel, s_retro, s_sel = _sandwich_values(result)
    reports = sandwich_reports(s_nonsel, s_retro, s_sel, h_y, h_m, context="full system")
    if dims is not None:
        for keep in ("A", "B"):
            vals = _sandwich_values(result, lambda s, k=keep: partial_trace(s, dims, k))
            reports += sandwich_reports(*vals, h_y, h_m, tag=keep, context=f"subsystem {keep}")
    return CentralReport(s_nonsel, s_retro, s_sel, h_y, h_m, reports)


def mutual_report(rho_ab, dims: BipartiteDims, first: MeasurementSet, second: MeasurementSet,
                  result: SmoothingResult | None = None) -> list[InequalityReport]:
    """Entropy differences bounding the mutual-information differences."""
    result = result or smooth(rho_ab, first, second)
    s_nonsel, s_retro, s_sel = _sandwich_values(result)
    i_nonsel = quantum_mutual(result.nonselective_state, dims)
    i_retro = sum(
        p * quantum_mutual(s, dims) for p, s in zip(result.p_y, result.smoothed_states) if p >= ZERO_PROB
    )
    i_sel = sum(
        p * quantum_mutual(s, dims) for p, s in zip(result.p_m, result.ensemble.states) if p >= ZERO_PROB
    )
    return [
        ge("mutual_2", s_nonsel - s_retro, i_nonsel - i_retro, "S diff bounds I diff (nonselective vs retro)"),
        ge("mutual_1", s_retro - s_sel, i_retro - i_sel, "S diff bounds I diff (retro vs selective)"),
    ]


def lift_to_a(mset: MeasurementSet, dims: BipartiteDims) -> MeasurementSet:
    """``M_y -> M_y (x) I_b`` for a measurement on subsystem A."""
    if mset.dim != dims.dim_a:
        raise DimensionError(f"measurement acts on dimension {mset.dim}, subsystem A has {dims.dim_a}")
    eye_b = np.eye(dims.dim_b)
    return MeasurementSet(tuple(kron(op, eye_b) for op in mset.operators), mset.labels)


def projector_on_b(basis_b, dims: BipartiteDims) -> MeasurementSet:
    """``Omega_m = I_a (x) |m><m|`` for an orthonormal basis of B (columns)."""
    basis = np.asarray(basis_b, dtype=complex)
    if basis.shape != (dims.dim_b, dims.dim_b):
        raise PreconditionError("basis of B must be a dim_b x dim_b matrix of column vectors")
    if np.max(np.abs(dagger(basis) @ basis - np.eye(dims.dim_b))) > 1e-10:
        raise PreconditionError("first measurement must be projective: basis of B is not orthonormal")
    eye_a = np.eye(dims.dim_a)
    ops = tuple(kron(eye_a, np.outer(basis[:, k], basis[:, k].conj())) for k in range(dims.dim_b))
    return MeasurementSet(ops)


@dataclass(frozen=True)
class ProjectiveBipartiteReport:
    # full bipartite entropies
    s_ab_nonselective: float
    s_ab_retro_avg: float
    s_ab_selective_avg: float
    # subsystem A entropies
    s_a_nonselective: float
    s_a_retro_avg: float
    s_a_selective_avg: float
    # subsystem B entropies
    s_b_nonselective: float
    s_b_retro_avg: float
    s_b_selective_avg: float
    # classical quantities
    h_m: float
    h_y: float
    h_m_given_y: float
    h_m_y: float
    # mutual informations
    i_nonselective: float
    i_retro_avg: float
    i_selective_avg: float
    holevo_chi: float
    retro_holevo_rhs: float
    identities: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def max_identity_defect(self) -> float:
        return max(abs(r.margin) for r in self.identities)

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.reports + self.identities)


def projective_bipartite_report(rho_ab, dims: BipartiteDims, basis_b, second: MeasurementSet,
                                result: SmoothingResult | None = None) -> ProjectiveBipartiteReport:
    """Projective measurement on B followed by an arbitrary one on A.

    ``basis_b`` holds the orthonormal basis of B as columns and ``second``
    acts on A only.
    """
    first = projector_on_b(basis_b, dims)
    second_ab = lift_to_a(second, dims)
    result = result or smooth(rho_ab, first, second_ab)
    p_m, p_y = result.p_m, result.p_y

    red_a = lambda s: partial_trace(s, dims, "A")
    red_b = lambda s: partial_trace(s, dims, "B")
    s_ab = _sandwich_values(result)
    s_a = _sandwich_values(result, red_a)
    s_b = _sandwich_values(result, red_b)

    joint = result.joint
    h_m, h_y = shannon_entropy(p_m), shannon_entropy(p_y)
    h_m_given_y = conditional_shannon(joint)
    h_my = classical_mutual(joint)

    def avg_mutual(probs, states):
        return sum(p * quantum_mutual(s, dims) for p, s in zip(probs, states) if p >= ZERO_PROB)

    i_nonsel = quantum_mutual(result.nonselective_state, dims)
    i_retro = avg_mutual(p_y, result.smoothed_states)
    i_sel = avg_mutual(p_m, result.ensemble.states)

    states_a_m = [red_a(s) for s in result.ensemble.states]
    chi = holevo_chi(p_m, states_a_m)
    states_a_y = [red_a(s) for s in result.smoothed_states]
    retro_rhs = holevo_chi(p_y, states_a_y)

    ids = []
    ids += identity("sab_proj", s_ab[0], h_m + s_a[2], "S[rho_Omega^ab] = H[m] + sum p(m) S[rho_m^a]")
    ids += identity("sab_smooth", s_ab[1], h_m_given_y + s_a[2], "sum p(y) S[rho_y^ab] = H[m|y] + sum p(m) S[rho_m^a]")
    ids += identity("sab_selective", s_ab[2], s_a[2], "sum p(m) S[rho_m^ab] = sum p(m) S[rho_m^a]")
    ids += identity("b_nonselective", s_b[0], h_m, "S[rho_Omega^b] = H[m]")
    ids += identity("b_retro", s_b[1], h_m_given_y, "sum p(y) S[rho_y^b] = H[m|y]")
    ids += identity("b_selective", s_b[2], 0.0, "sum p(m) S[rho_m^b] = 0")
    ids += identity("selective_mutual_zero", i_sel, 0.0, "sum p(m) I[rho_m^ab] = 0")
    ids += identity("positive2_middle", i_nonsel - i_retro, s_a[0] - s_a[1], "I diff = S^a diff")
    ids += identity("positive1_middle", i_retro - i_sel, s_a[1] - s_a[2], "I diff = S^a diff")
    ids += identity("upper_proj_middle", s_ab[0] - s_ab[1], h_my, "S^ab diff = H[m:y]")
    ids += identity("lower_proj_middle", s_ab[1] - s_ab[2], h_m_given_y, "S^ab diff = H[m|y]")

    reports = [
        ge("positive2_upper", h_my, i_nonsel - i_retro, "H[m:y] >= I[Omega] - sum p(y) I[y]"),
        ge("positive2_lower", s_a[0] - s_a[1], 0.0, "S[rho_Omega^a] - sum p(y) S[rho_y^a] >= 0"),
        ge("positive2_cap", h_y, h_my, "H[y] >= H[m:y]"),
        ge("positive1_upper", h_m_given_y, i_retro - i_sel, "H[m|y] >= sum p(y) I[y] - sum p(m) I[m]"),
        ge("positive1_lower", s_a[1] - s_a[2], 0.0, "sum p(y) S[rho_y^a] - sum p(m) S[rho_m^a] >= 0"),
        ge("positive1_cap", h_m, h_m_given_y, "H[m] >= H[m|y]"),
        ge("holevo", chi, h_my, "chi >= H[m:y]"),
        ge("retro_holevo", h_my, retro_rhs, "H[m:y] >= S[sum p(y) rho_y^a] - sum p(y) S[rho_y^a]"),
        ge("upper_proj_bound", h_y, s_ab[0] - s_ab[1], "S^ab nonselective - retro <= H[y]"),
        ge("lower_proj_bound", h_m, s_ab[1] - s_ab[2], "S^ab retro - selective <= H[m]"),
        ge("entropy_a_upper", s_a[0], s_a[1], "S[rho_Omega^a] >= sum p(y) S[rho_y^a]"),
        ge("entropy_a_lower", s_a[1], s_a[2], "sum p(y) S[rho_y^a] >= sum p(m) S[rho_m^a]"),
    ]
    return ProjectiveBipartiteReport(
        *s_ab, *s_a, *s_b,
        h_m=h_m, h_y=h_y, h_m_given_y=h_m_given_y, h_m_y=h_my,
        i_nonselective=i_nonsel, i_retro_avg=i_retro, i_selective_avg=i_sel,
        holevo_chi=chi, retro_holevo_rhs=retro_rhs,
        identities=ids, reports=reports,
    )


def _classical_register(probs) -> np.ndarray:
    return np.diag(np.asarray(probs, dtype=complex))


def _ssa_reports(rho_abc, dims3: tuple[int, int, int], name: str) -> list[InequalityReport]:
    s = lambda keep: von_neumann_entropy(reduce_to(rho_abc, dims3, keep))
    s_abc = von_neumann_entropy(rho_abc)
    return [
        ge(name + "[a]", s((0, 1)) + s((0, 2)), s_abc + s((0,)), "S[ab] + S[ac] >= S[abc] + S[a]"),
        ge(name + "[b]", s((0, 1)) + s((1, 2)), s_abc + s((1,)), "S[ab] + S[bc] >= S[abc] + S[b]"),
    ]


def tripartite_checks(joint: JointDistribution, states_m_ab, dims: BipartiteDims) -> list[InequalityReport]:
    """Ancilla extensions of the mutual-information bounds.

    Builds ``rho^abc = sum p(m,y) rho_m^ab (x) |y><y|`` and, per reachable
    ``y``, ``rho_y^abc = sum p(m|y) rho_m^ab (x) |m><m|``; checks their
    block entropy decompositions and strong subadditivity.
    """
    n_y, n_m = joint.p_ym.shape
    if len(states_m_ab) != n_m:
        raise DimensionError("one bipartite state per first outcome required")
    if dims.total * max(n_y, n_m) > MAX_TRIPARTITE_DIM:
        raise DimensionError(f"tripartite dimension exceeds {MAX_TRIPARTITE_DIM}")
    states = [np.asarray(s) for s in states_m_ab]
    p_y = joint.p_y
    reports = []

    rho_abc = sum(
        joint.p_ym[y, m] * kron(states[m], _classical_register(np.eye(n_y)[y]))
        for y in range(n_y) for m in range(n_m)
    )
    rho_y_ab = []
    for y in range(n_y):
        if p_y[y] < ZERO_PROB:
            rho_y_ab.append(None)
            continue
        rho_y_ab.append(sum(joint.p_ym[y, m] / p_y[y] * states[m] for m in range(n_m)))
    rhs = shannon_entropy(p_y) + sum(
        p_y[y] * von_neumann_entropy(r) for y, r in enumerate(rho_y_ab) if r is not None
    )
    reports += identity("stripartita", von_neumann_entropy(rho_abc), rhs, "S[abc] = H[y] + sum p(y) S[rho_y^ab]")
    dims3 = (dims.dim_a, dims.dim_b, n_y)
    reports += _ssa_reports(rho_abc, dims3, "ssa_first")

    for y in range(n_y):
        if p_y[y] < ZERO_PROB:
            continue
        cond = joint.p_ym[y] / p_y[y]
        rho_y_abc = sum(cond[m] * kron(states[m], _classical_register(np.eye(n_m)[m])) for m in range(n_m))
        c = cond[cond > 0]
        h_cond = float(-np.sum(c * np.log(c)))
        rhs = h_cond + sum(cond[m] * von_neumann_entropy(states[m]) for m in range(n_m) if cond[m] > 0)
        reports += identity(f"stripartita_y[{y}]", von_neumann_entropy(rho_y_abc), rhs,
                            "S[rho_y^abc] = H[m]|_y + sum p(m|y) S[rho_m^ab]")
        reports += _ssa_reports(rho_y_abc, (dims.dim_a, dims.dim_b, n_m), f"ssa_second[{y}]")
    return reports
