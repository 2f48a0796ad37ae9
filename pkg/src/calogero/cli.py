"""Command-line front end: ``calogero {verify,ground-state,factorize,sweep,zeros}``.

Exit status: 0 when every check passes, 1 on a numerical failure, 2 on a
usage or regime error.  Lengths are reported in units of 1/k0 and energies in
units of k0^2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import extensions as ext
from . import factorization as fz
from . import oracle, suites
from .factorization import CouplingParams, FactorizationParams, PhiFamily

SCHEMA = "calogero-report/1"
UNITS = "lengths in 1/k0, energies in k0^2, h in k0"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    values: dict[str, Any] = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)
    checks: list[suites.Check] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, value: float, tol: float, detail: str = "") -> None:
        self.checks.append(suites.Check(name, float(value), tol, bool(value <= tol), detail))

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "units": UNITS,
            "inputs": self.inputs,
            "values": self.values,
            "columns": self.columns,
            "rows": self.rows,
            "checks": [c.to_dict() for c in self.checks],
            "provenance": self.provenance,
            "notes": self.notes,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# formatting


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report.columns:
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        writer.writerow(["check", "value", "tolerance", "passed", "detail"])
        for c in report.checks:
            writer.writerow([c.name, _fmt(c.value), _fmt(c.tolerance), _fmt(c.passed), c.detail])
    return buf.getvalue()


def render_json(report: Report) -> str:
    return json.dumps(_jsonable(report.to_dict()), indent=2, allow_nan=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def render_table(report: Report) -> str:
    out = [f"# {report.command}   ({UNITS})"]
    out.append("inputs: " + ", ".join(f"{k}={_fmt(v)}" for k, v in report.inputs.items()))
    for k, v in report.values.items():
        out.append(f"  {k:<28s} {_fmt(v)}")
    if report.columns:
        widths = [max(len(c), 22) for c in report.columns]
        out.append("  ".join(c.rjust(w) for c, w in zip(report.columns, widths)))
        for row in report.rows:
            out.append("  ".join(_fmt(v).rjust(w) for v, w in zip(row, widths)))
    for c in report.checks:
        flag = "PASS" if c.passed else "FAIL"
        tail = f"  [{c.detail}]" if c.detail else ""
        out.append(f"  {flag}  {c.name}: {c.value:.3e} (tol {c.tolerance:g}){tail}")
    for n in report.notes:
        out.append(f"  note: {n}")
    if report.provenance:
        out.append("provenance: " + "; ".join(report.provenance))
    out.append("status: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(out) + "\n"


RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


# ---------------------------------------------------------------------------
# argument helpers

_PI_RE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str) -> float:
    """A float, or a multiple of pi such as ``-pi/4``, ``3pi/8``, ``0.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text.replace("π", "pi"))
    if not m:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coef = float(m.group(2)) if m.group(2) else 1.0
    den = float(m.group(3)) if m.group(3) else 1.0
    return sign * coef * math.pi / den


def _angle_text(nu: ext.ExtensionParam) -> str:
    if nu.regime is ext.Regime.H1:
        return "none (H1 is unique)"
    if nu.friedrichs:
        return "±π/2"
    return f"{nu.nu:.15g} ({nu.nu / math.pi:.15g} pi)"


def _coupling(args) -> CouplingParams:
    return CouplingParams.from_alpha(args.alpha, args.k0)


# ---------------------------------------------------------------------------
# commands


def cmd_factorize(args) -> Report:
    c = _coupling(args)
    regime = ext.classify(c)
    if regime is ext.Regime.NO_FACTORIZATION:
        raise UsageError(f"alpha = {args.alpha} < -1/4: no factorized (oscillator) representation "
                         "exists, since every real solution has infinitely many zeros near the origin")
    fam = PhiFamily(c, FactorizationParams(args.mu, args.s))
    rep = Report("factorize", {"alpha": args.alpha, "mu": args.mu, "s": args.s, "k0": args.k0})
    k0 = c.k0
    rep.values["kappa"] = c.kappa
    rep.values["regime"] = regime.value
    rep.values["lower bound -(s k0)^2 [k0^2]"] = -(args.s**2) or 0.0
    if regime is ext.Regime.H1:
        rep.values["Hamiltonian"] = "H1 (unique)"
    elif fz._is_half_pi(args.mu):
        rep.values["Hamiltonian"] = f"{regime.value}(nu=±π/2)"
        rep.values["nu"] = "±π/2"
    else:
        theta = ext.theta_of(fam.params, c)
        rep.values["Hamiltonian"] = f"{regime.value}(nu={theta:.15g})"
        rep.values["nu"] = theta
        rep.values["nu / pi"] = theta / math.pi
    if regime is not ext.Regime.H1 and args.s > 0:
        try:
            rep.values["amp_tilde"] = fam.amp_tilde
        except fz.InvalidParamsError:
            pass
    if args.s > 0:
        rep.values["h(x -> inf) [k0]"] = fz.h_limit_at_infinity(fam) / k0
    grid = fz.log_grid(k0, lo=1e-3, hi=1e3, per_decade=100)
    rep.check("riccati residual (normalised)", fz.riccati_residual(fam, grid), args.tol_riccati)
    rep.check("factorization residual (relative to max|H f|)", fz.factorization_residual(fam),
              args.tol_factorization)
    xs = np.geomspace(1e-3, 10.0, args.samples) / k0
    rep.columns = ["x [1/k0]", "phi", "h [k0]", "h' [k0^2]"]
    ph, hh, hp = fz.phi(fam, xs), fz.h(fam, xs), fz.h_prime(fam, xs)
    rep.rows = [[x * k0, p, a / k0, b / k0**2] for x, p, a, b in zip(xs, ph, hh, hp)]
    rep.provenance = ["positive-solution family phi(mu,s)", "Riccati condition for h = phi'/phi",
                      "factorization H = b a - (s k0)^2", "angle map theta(mu,s)"]
    return rep


def _extension(args, c: CouplingParams) -> ext.ExtensionParam:
    regime = ext.classify(c)
    if regime is ext.Regime.NO_FACTORIZATION:
        raise UsageError(f"alpha = {args.alpha} < -1/4: the operator is unbounded below; "
                         "no self-adjoint extension is semibounded")
    if regime is ext.Regime.H1:
        return ext.ExtensionParam(None, regime)
    if args.nu is None:
        raise UsageError(f"--nu is required in regime {regime.value}")
    return ext.ExtensionParam(args.nu, regime)


def cmd_ground_state(args) -> Report:
    c = _coupling(args)
    nu = _extension(args, c)
    rep = Report("ground-state", {"alpha": args.alpha, "nu": args.nu, "k0": args.k0})
    rep.values["regime"] = nu.regime.value
    rep.values["nu"] = _angle_text(nu)
    gs = ext.ground_state(nu, c)
    k0sq = c.k0**2
    cfg = oracle.ShootingConfig()
    rep.columns = ["quantity", "closed form", "oracle", "relative difference"]
    if gs.exists:
        res = oracle.find_bound_state(nu, c, cfg)
        e_cf = gs.energy / k0sq
        e_or = res.energy / k0sq if res.exists else math.nan
        rel = abs(e_or - e_cf) / abs(e_cf) if res.exists else math.inf
        rep.values["E closed form [k0^2]"] = e_cf
        rep.values["E oracle [k0^2]"] = e_or
        rep.rows = [["E [k0^2]", e_cf, e_or, rel]]
        rep.check("closed form vs oracle (relative)", rel, args.tol_energy)
        rep.check("normalization |int U^2 - 1|", abs(gs.normalization() - 1), 1e-8)
        mesh = np.geomspace(1e-3, 40, 400) / gs.decay_rate
        rep.check("eigen-residual / (|E| max|U|)", gs.eigen_residual(mesh), 1e-6)
        rep.provenance = ["ground-state energy E2(nu) / E3(nu)", "normalized eigenfunction U2 / U3",
                          "independent shooting oracle"]
    else:
        rep.values["E closed form [k0^2]"] = 0.0
        rep.notes.append("no bound state; spectrum lower boundary 0")
        scan_cfg = oracle.ShootingConfig(e_bracket=(-10.0, -1e-6))
        _, values = oracle.scan(nu, c, scan_cfg)
        changes = oracle.count_sign_changes(values)
        rep.rows = [["E [k0^2]", 0.0, math.nan, math.nan]]
        rep.checks.append(suites.Check("oracle sign changes in [-10, -1e-6] k0^2", changes, 0,
                                       changes == 0))
        rep.provenance = ["absence of negative levels for nu >= 0 / unique H1",
                          "independent shooting oracle"]
    return rep


def cmd_sweep(args) -> Report:
    c = _coupling(args)
    nu = _extension(args, c)
    rep = Report("sweep", {"alpha": args.alpha, "nu": args.nu, "k0": args.k0,
                           "mu_points": args.mu_points, "s_points": args.s_points})
    rep.values["regime"] = nu.regime.value
    rep.values["nu"] = _angle_text(nu)
    s_samples = tuple(np.linspace(0.0, args.s_max, args.s_points))
    if nu.regime is ext.Regime.H1:
        mus = list(np.linspace(0.0, fz.HALF_PI, args.mu_points))
    elif nu.friedrichs:
        mus = None
    else:
        mus = ext.admissible_mu_grid(nu, args.mu_points, args.mu_max)
    rows = ext.representation_table(nu, c, mus, s_samples)
    k0sq = c.k0**2
    rep.columns = ["mu", "s", "lower bound [k0^2]", "optimal"]
    rep.rows = [[r.mu, r.s, r.lower_bound / k0sq, r.optimal] for r in rows]
    best = next(r for r in rows if r.optimal)
    rep.values["optimum mu"] = best.mu
    rep.values["s_min"] = best.s
    if nu.regime is not ext.Regime.H1 and not nu.friedrichs:
        increasing = bool(np.all(np.diff([r.s for r in rows]) > 0))
        rep.checks.append(suites.Check("s strictly increasing in mu", float(increasing), 1.0, increasing))
    gs = ext.ground_state(nu, c)
    if gs.exists:
        rep.check("optimum bound vs ground-state energy (relative)",
                  abs(best.lower_bound - gs.energy) / abs(gs.energy), 1e-12)
    else:
        rep.check("optimum bound vs spectrum boundary 0", abs(best.lower_bound), 0.0)
    rep.provenance = ["family of representations of a fixed extension", "map s(mu, nu)",
                      "optimum representation"]
    return rep


def cmd_zeros(args) -> Report:
    c = _coupling(args)
    if c.factorizable:
        raise UsageError(f"alpha = {args.alpha} >= -1/4: solutions have finitely many zeros; "
                         "the oscillation analysis needs alpha < -1/4")
    seq = ext.oscillation_zeros(c, args.s, args.phase, (args.x_lo, args.x_hi), tol=args.tol_window)
    rep = Report("zeros", {"alpha": args.alpha, "s": args.s, "phase": args.phase, "k0": args.k0,
                           "x_lo": args.x_lo, "x_hi": args.x_hi})
    rep.values["sigma"] = c.sigma
    rep.values["zeros found"] = int(seq.zeros.size)
    rep.values["ratio estimate"] = seq.ratio_estimate
    rep.values["exp(-pi/sigma)"] = seq.predicted_ratio
    rep.values["correction bound"] = seq.correction_bound
    rep.columns = ["n", "x_n [1/k0]", "x_n / x_(n-1)"]
    prev = None
    for i, x in enumerate(seq.zeros):
        rep.rows.append([i, x * c.k0, (x / prev) if prev else math.nan])
        prev = x
    if seq.zeros.size >= 2:
        ratios = seq.zeros[1:] / seq.zeros[:-1]
        rep.check("max |ratio / exp(-pi/sigma) - 1|",
                  float(np.max(np.abs(ratios / seq.predicted_ratio - 1))), args.tol_ratio)
    expected = math.floor(math.log(args.x_hi / args.x_lo) * c.sigma / math.pi)
    shortfall = max(0, expected - int(seq.zeros.size))
    rep.check(f"zero count >= {expected}", shortfall, 0)
    rep.provenance = ["log-periodic oscillation of solutions for alpha < -1/4"]
    return rep


def cmd_verify(args) -> Report:
    names = list(suites.SUITES) if args.suite == ["all"] else args.suite
    rep = Report("verify", {"suites": names, "seed": args.seed})
    for name in names:
        for check in suites.SUITES[name](args.seed):
            rep.checks.append(suites.Check(f"[{name}] {check.name}", check.value, check.tolerance,
                                           check.passed, check.detail))
    rep.values["checks"] = len(rep.checks)
    rep.values["failed"] = sum(not c.passed for c in rep.checks)
    rep.provenance = [f"criterion {k}: {v}" for k, v in suites.CRITERIA.items() if v in names]
    return rep


COMMANDS = {
    "factorize": cmd_factorize,
    "ground-state": cmd_ground_state,
    "sweep": cmd_sweep,
    "zeros": cmd_zeros,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=sorted(RENDERERS), default="table")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=suites.DEFAULT_SEED)
    common.add_argument("--k0", type=float, default=1.0, help="scale k0 (inverse length)")

    p = argparse.ArgumentParser(prog="calogero", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factorize", parents=[common], help="one member phi(mu, s) of the family")
    f.add_argument("--alpha", type=float, required=True)
    f.add_argument("--mu", type=parse_angle, required=True)
    f.add_argument("--s", type=float, required=True)
    f.add_argument("--samples", type=int, default=9)
    f.add_argument("--tol-riccati", type=float, default=1e-7)
    f.add_argument("--tol-factorization", type=float, default=1e-8)

    g = sub.add_parser("ground-state", parents=[common], help="closed-form vs oracle ground state")
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--nu", type=parse_angle)
    g.add_argument("--tol-energy", type=float, default=1e-6)

    s = sub.add_parser("sweep", parents=[common], help="representation table of an extension")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--nu", type=parse_angle)
    s.add_argument("--mu-points", type=int, default=16)
    s.add_argument("--mu-max", type=float, default=1.5)
    s.add_argument("--s-points", type=int, default=4)
    s.add_argument("--s-max", type=float, default=3.0)

    z = sub.add_parser("zeros", parents=[common], help="zeros near the origin for alpha < -1/4")
    z.add_argument("--alpha", type=float, required=True)
    z.add_argument("--s", type=float, default=1.0)
    z.add_argument("--phase", type=float, default=0.0)
    z.add_argument("--x-lo", type=float, default=1e-30)
    z.add_argument("--x-hi", type=float, default=1e-5)
    z.add_argument("--tol-window", type=float, default=1e-6)
    z.add_argument("--tol-ratio", type=float, default=1e-8)

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", nargs="+", default=["all"], choices=["all", *suites.SUITES])
    return p


_ANGLE_FLAGS = ("--nu", "--mu", "--phase")


def _glue_negative_angles(argv: list[str]) -> list[str]:
    # argparse would take "-pi/4" for an option; rewrite as "--nu=-pi/4"
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _ANGLE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_glue_negative_angles(argv))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            report = COMMANDS[args.command](args)
    except (UsageError, ext.RegimeError, fz.NoFactorizationError, fz.InvalidParamsError,
            ext.WindowTooLargeError) as exc:
        print(f"calogero {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.inputs["seed"] = args.seed
    text = RENDERERS[args.format](report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
