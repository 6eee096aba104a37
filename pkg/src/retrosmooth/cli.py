"""Command-line front end: ``retrosmooth {verify,fig2,fig3,fig4}``.

Exit codes: 0 success, 1 inequality violation, 2 usage or I/O error,
3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InvariantError, NumericError, RetroSmoothError
from .experiments import (
    FIG4_STATES,
    QubitGaussianConfig,
    hybrid_curve,
    log_grid,
    qubit_entropy_curves,
)
from .infotheory import InequalityReport, central_report, mutual_report, projective_bipartite_report, tripartite_checks
from .measurement import MeasurementSet, random_density, random_measurement_set
from .qmat import BipartiteDims, BlochVector, haar_unitary
from .quadrature import QuadratureSpec
from .retrodiction import smooth

log = logging.getLogger("retrosmooth")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

FIG_COLUMNS = {
    "fig2": ("a", "s_nonselective", "s_retro_avg", "s_selective_avg", "s_initial"),
    "fig3": ("a", "v_omega", "v_plus", "v_minus", "s_rho_plus", "s_rho_minus", "s_nonselective", "s_selective_avg"),
    "fig4": ("q", "s_a_nonsel", "s_a_retro", "s_a_sel", "i_nonsel", "i_retro", "i_sel", "holevo_chi", "h_my"),
}
ENTROPY_COLUMNS = {
    "s_nonselective", "s_retro_avg", "s_selective_avg", "s_initial", "s_rho_plus", "s_rho_minus",
    "s_a_nonsel", "s_a_retro", "s_a_sel", "i_nonsel", "i_retro", "i_sel", "holevo_chi", "h_my",
}
FAMILIES = ("single", "bipartite", "projective", "tripartite")


@dataclass
class Case:
    """One sampled verification configuration, kept for replay on failure."""

    index: int
    family: str
    seed: int
    rho: np.ndarray
    first: MeasurementSet
    second: MeasurementSet
    dims: BipartiteDims | None = None

    def describe(self) -> str:
        opts = dict(precision=6, suppress_small=True, max_line_width=120)
        lines = [f"case {self.index} family={self.family} seed={self.seed} dims={self.dims}"]
        lines.append("rho =\n" + np.array2string(self.rho, **opts))
        for tag, mset in (("Omega", self.first), ("M", self.second)):
            for label, op in zip(mset.labels, mset.operators):
                lines.append(f"{tag}[{label}] =\n" + np.array2string(op, **opts))
        return "\n".join(lines)


def _rng_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


def sample_case(index: int, family: str, seed: int) -> Case:
    """Deterministic configuration for ``(seed, index)`` in a given family."""
    case_seed = int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(case_seed)
    if family == "single":
        dim = int(rng.integers(2, 5))
        rho = random_density(dim, _rng_seed(rng))
        first = random_measurement_set(dim, int(rng.integers(2, 5)), _rng_seed(rng))
        second = random_measurement_set(dim, int(rng.integers(2, 5)), _rng_seed(rng))
        return Case(index, family, case_seed, rho, first, second)
    if family in ("bipartite", "tripartite"):
        dims = BipartiteDims(2, 2) if family == "tripartite" or rng.integers(2) == 0 else BipartiteDims(2, 3)
        rho = random_density(dims.total, _rng_seed(rng))
        n_first = int(rng.integers(2, 4))
        n_second = int(rng.integers(2, 4))
        first = random_measurement_set(dims.total, n_first, _rng_seed(rng))
        second = random_measurement_set(dims.total, n_second, _rng_seed(rng))
        return Case(index, family, case_seed, rho, first, second, dims)
    if family == "projective":
        dims = [BipartiteDims(2, 2), BipartiteDims(2, 3), BipartiteDims(3, 2)][int(rng.integers(3))]
        rho = random_density(dims.total, _rng_seed(rng))
        basis = haar_unitary(dims.dim_b, rng)
        second = random_measurement_set(dims.dim_a, int(rng.integers(2, 5)), _rng_seed(rng))
        # kept in A-only form; the report lifts it
        first = MeasurementSet.projective(basis)
        return Case(index, family, case_seed, rho, first, second, dims)
    if family in ("same-basis", "unbiased"):
        dim = int(rng.integers(2, 5))
        rho = random_density(dim, _rng_seed(rng))
        u = haar_unitary(dim, rng)
        if family == "same-basis":
            first = second = MeasurementSet.projective(u)
        else:
            fourier = np.exp(2j * np.pi * np.outer(np.arange(dim), np.arange(dim)) / dim) / math.sqrt(dim)
            first, second = MeasurementSet.projective(u), MeasurementSet.projective(u @ fourier)
        return Case(index, family, case_seed, rho, first, second)
    raise ValueError(f"unknown family {family!r}")


def case_reports(case: Case) -> list[InequalityReport]:
    if case.family == "projective":
        basis = np.column_stack([np.linalg.eigh(op)[1][:, -1] for op in case.first.operators])
        rep = projective_bipartite_report(case.rho, case.dims, basis, case.second)
        return rep.reports + rep.identities
    result = smooth(case.rho, case.first, case.second)
    if case.family == "tripartite":
        return tripartite_checks(result.joint, result.ensemble.states, case.dims)
    reports = central_report(case.rho, case.first, case.second, case.dims, result=result).reports
    if case.family == "bipartite":
        reports = reports + mutual_report(case.rho, case.dims, case.first, case.second, result=result)
    return reports


def _family_of(name: str) -> str:
    return name.split("[")[0].split(":")[0]


def run_verify(args) -> int:
    families = FAMILIES if args.family == "all" else (args.family,)
    rows, minima, violations = [], {}, []
    for i in range(args.cases):
        case = sample_case(i, families[i % len(families)], args.seed)
        for rep in case_reports(case):
            rec = rep.to_dict()
            rec["context"] = f"case={i} family={case.family} seed={case.seed}; {rep.context}"
            rows.append(rec)
            fam = _family_of(rep.name)
            minima[fam] = min(minima.get(fam, math.inf), rep.margin)
            if not rep.satisfied:
                violations.append((case, rep))
    _write_records(args, rows, ("name", "lhs", "rhs", "margin", "satisfied", "context"))
    scale = 1 / math.log(2) if args.bits else 1.0
    unit = "bits" if args.bits else "nats"
    for fam in sorted(minima):
        print(f"min margin {fam}: {minima[fam] * scale:.3e} {unit}")
    print(f"{args.cases} cases, {len(rows)} reports, {len(violations)} violations")
    for case, rep in violations:
        print(f"VIOLATION {rep.name}: margin {rep.margin:.3e}\n{case.describe()}", file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


def _qubit_configs(args) -> list[QubitGaussianConfig]:
    if not (0 < args.a_min <= args.a_max):
        raise DomainError("require 0 < --a-min <= --a-max")
    initial = BlochVector(args.r, args.theta_i, args.phi_i)
    return [QubitGaussianConfig(initial, float(a), args.theta, args.phi) for a in log_grid(args.a_min, args.a_max, args.grid)]


def _parse_bloch(text: str) -> BlochVector:
    try:
        r, theta, phi = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected r,theta,phi, got {text!r}") from exc
    return BlochVector(r, theta, phi)


def run_figure(args) -> int:
    cols = FIG_COLUMNS[args.command]
    if args.command == "fig4":
        if args.q_grid < 2:
            raise DomainError("--q-grid needs at least 2 points")
        rows = hybrid_curve(np.linspace(0.0, 1.0, args.q_grid), args.state1, args.state2)
    else:
        rows = qubit_entropy_curves(_qubit_configs(args), QuadratureSpec())
    scale = 1 / math.log(2) if args.bits else 1.0
    out = [{c: float(r[c]) * (scale if c in ENTROPY_COLUMNS else 1.0) for c in cols} for r in rows]
    _write_records(args, out, cols, float_format="{:.12g}")
    return EXIT_OK


def _write_records(args, rows, columns, float_format=None):
    def fmt(v):
        if float_format and isinstance(v, float):
            return float_format.format(v + 0.0)
        return v

    buf = io.StringIO()
    if args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])
    else:
        for r in rows:
            rec = {c: r[c] for c in columns}
            if float_format:
                rec = {c: (float(fmt(v)) if isinstance(v, float) else v) for c, v in rec.items()}
            buf.write(json.dumps(rec) + "\n")
    if args.out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retrosmooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out, default_format="csv"):
        p.add_argument("--out", default=default_out, help="output file, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.add_argument("--bits", action="store_true", help="display entropies in bits instead of nats")

    v = sub.add_parser("verify", help="fuzz-check every entropic inequality on seeded configurations")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, default=1000)
    v.add_argument("--family", choices=("all",) + FAMILIES + ("same-basis", "unbiased"), default="all")
    common(v, "verify_report.jsonl", "json")

    for name, default_theta in (("fig2", math.pi / 4), ("fig3", math.pi / 4)):
        f = sub.add_parser(name, help=f"data for the {name} qubit curves")
        f.add_argument("--a-min", type=float, default=0.02)
        f.add_argument("--a-max", type=float, default=20.0)
        f.add_argument("--grid", type=int, default=60)
        f.add_argument("--theta", type=float, default=default_theta)
        f.add_argument("--phi", type=float, default=math.pi)
        f.add_argument("--r", type=float, default=0.9)
        f.add_argument("--theta-i", type=float, default=math.pi / 4)
        f.add_argument("--phi-i", type=float, default=0.0)
        common(f, f"{name}.csv")

    f4 = sub.add_parser("fig4", help="data for the hybrid quantum-classical curves")
    f4.add_argument("--q-grid", type=int, default=101)
    f4.add_argument("--state1", type=_parse_bloch, default=FIG4_STATES[0], help="r,theta,phi of macrostate 1")
    f4.add_argument("--state2", type=_parse_bloch, default=FIG4_STATES[1], help="r,theta,phi of macrostate 2")
    common(f4, "fig4.csv")
    return parser


COMMANDS: dict[str, Callable] = {"verify": run_verify, "fig2": run_figure, "fig3": run_figure, "fig4": run_figure}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.cases < 1:
        log.error("--cases must be positive")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except NumericError as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except InvariantError as exc:
        log.error("%s", exc)
        return EXIT_VIOLATION
    except (DomainError, RetroSmoothError, ValueError) as exc:
        log.error("invalid parameters: %s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
