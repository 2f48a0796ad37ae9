"""Verification suites shared by ``calogero verify`` and the acceptance tests.

Each suite returns a list of :class:`Check` records.  Random cases are drawn
from ``numpy.random.default_rng(seed)`` so that runs are reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import extensions as ext
from . import factorization as fz
from . import oracle, specfun
from .factorization import CouplingParams, FactorizationParams, PhiFamily

DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _le(name: str, value: float, tol: float, detail: str = "") -> Check:
    return Check(name, float(value), tol, bool(value <= tol), detail)


def random_families(seed: int = DEFAULT_SEED, n_random: int = 100, n_zero: int = 20) -> list[PhiFamily]:
    """The randomized family sweep: kappa in (0, 2] plus kappa = 0 with s > 0."""
    rng = np.random.default_rng(seed)
    fams = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for _ in range(n_random):
            kappa = 2.0 * (1.0 - rng.random())
            mu = rng.uniform(0, fz.HALF_PI)
            s = rng.uniform(0, 5)
            fams.append(PhiFamily(CouplingParams.from_kappa(kappa), FactorizationParams(mu, s)))
        for _ in range(n_zero):
            mu = rng.uniform(0, fz.HALF_PI)
            s = 5.0 * (1.0 - rng.random())
            fams.append(PhiFamily(CouplingParams.from_kappa(0.0), FactorizationParams(mu, s)))
    return fams


def _describe(fam: PhiFamily) -> str:
    return f"kappa={fam.kappa:.6g} mu={fam.params.mu:.6g} s={fam.params.s:.6g}"


# ---------------------------------------------------------------------------


def suite_riccati(seed: int = DEFAULT_SEED) -> list[Check]:
    grid = fz.log_grid(lo=1e-3, hi=1e3, per_decade=100)
    worst, where = 0.0, ""
    for fam in random_families(seed):
        r = fz.riccati_residual(fam, grid)
        if not r <= worst:
            worst, where = r, _describe(fam)
    return [_le("riccati residual, 120 families, 6 decades", worst, 1e-7, where)]


def suite_factorization(seed: int = DEFAULT_SEED) -> list[Check]:
    worst, where = 0.0, ""
    for fam in random_families(seed):
        r = fz.factorization_residual(fam)
        if not r <= worst:
            worst, where = r, _describe(fam)
    return [_le("factorization identity, 5 bumps x 120 families", worst, 1e-8, where)]


ORACLE_KAPPAS = (0.25, 0.5, 0.75)
ORACLE_NUS = (-1.3, -0.9, -0.5, -0.2, -0.05)
ORACLE_NUS_ZERO = (-1.0, -0.5, 0.0, 0.5, 1.0)


def suite_oracle(seed: int = DEFAULT_SEED) -> list[Check]:
    checks = []
    worst, where = 0.0, ""
    for kappa in ORACLE_KAPPAS:
        c = CouplingParams.from_kappa(kappa)
        for nu_val in ORACLE_NUS:
            nu = ext.ExtensionParam.for_coupling(nu_val, c)
            e_cf = ext.ground_state(nu, c).energy
            res = oracle.find_bound_state(nu, c)
            rel = abs(res.energy - e_cf) / abs(e_cf) if res.exists else math.inf
            if not rel <= worst:
                worst, where = rel, f"kappa={kappa} nu={nu_val}"
    checks.append(_le("oracle vs E2 on 3x5 grid (relative)", worst, 1e-6, where))
    worst, where = 0.0, ""
    c = CouplingParams.from_kappa(0.0)
    for nu_val in ORACLE_NUS_ZERO:
        nu = ext.ExtensionParam.for_coupling(nu_val, c)
        e_cf = ext.ground_state(nu, c).energy
        res = oracle.find_bound_state(nu, c)
        rel = abs(res.energy - e_cf) / abs(e_cf) if res.exists else math.inf
        if not rel <= worst:
            worst, where = rel, f"nu={nu_val}"
    checks.append(_le("oracle vs E3 at kappa=0 (relative)", worst, 1e-5, where))
    c = CouplingParams.from_kappa(0.5)
    nu = ext.ExtensionParam.for_coupling(-math.pi / 4, c)
    e_cf = ext.ground_state(nu, c).energy
    checks.append(_le("worked case closed form |E+1|", abs(e_cf + 1), 1e-14))
    res = oracle.find_bound_state(nu, c)
    checks.append(_le("worked case oracle |E+1|", abs(res.energy + 1), 1e-6))
    return checks


def suite_ground_state(seed: int = DEFAULT_SEED) -> list[Check]:
    rng = np.random.default_rng(seed + 4)
    cases = []
    for _ in range(15):
        cases.append((rng.uniform(0.1, 0.9), rng.uniform(-1.3, -0.1)))
    for _ in range(5):
        cases.append((0.0, rng.uniform(-1.0, 1.0)))
    worst_norm = worst_res = 0.0
    for kappa, nu_val in cases:
        c = CouplingParams.from_kappa(kappa)
        gs = ext.ground_state(ext.ExtensionParam.for_coupling(nu_val, c), c)
        worst_norm = max(worst_norm, abs(gs.normalization() - 1))
        mesh = np.geomspace(1e-3, 40, 600) / gs.decay_rate
        worst_res = max(worst_res, gs.eigen_residual(mesh))
    c = CouplingParams.from_kappa(0.5)
    gs = ext.ground_state(ext.ExtensionParam.for_coupling(-math.pi / 4, c), c)
    x = np.geomspace(1e-3, 40, 400)
    collapse = float(np.max(np.abs(gs.wavefunction(x) - math.sqrt(2) * np.exp(-x))))
    return [
        _le("normalization |int U^2 - 1|, 20 cases", worst_norm, 1e-8),
        _le("eigen-residual / (|E| max|U|), 20 cases", worst_res, 1e-6),
        _le("kappa=1/2 collapse max|U - sqrt2 e^-x|", collapse, 1e-10),
    ]


def suite_no_bound_state(seed: int = DEFAULT_SEED) -> list[Check]:
    cases = []
    for alpha in (0.75, 2.0, 6.0):
        cases.append((f"H1 alpha={alpha}", CouplingParams.from_alpha(alpha), None))
    c2 = CouplingParams.from_kappa(0.5)
    for nu_val in (0.0, 0.4, 1.2):
        cases.append((f"H2 kappa=0.5 nu={nu_val}", c2, nu_val))
    cases.append(("H2 kappa=0.5 nu=±pi/2", c2, math.pi / 2))
    cases.append(("H3 nu=±pi/2", CouplingParams.from_kappa(0.0), -math.pi / 2))
    cfg = oracle.ShootingConfig(e_bracket=(-10.0, -1e-6), n_scan=60)
    checks = []
    for label, c, nu_val in cases:
        nu = ext.ExtensionParam.for_coupling(nu_val, c)
        _, values = oracle.scan(nu, c, cfg)
        changes = oracle.count_sign_changes(values)
        checks.append(Check(f"no root in [-10,-1e-6]: {label}", changes, 0, changes == 0,
                            f"min|mismatch|={np.min(np.abs(values)):.3g}"))
    return checks


def suite_extensions(seed: int = DEFAULT_SEED) -> list[Check]:
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for i in range(200):
        if i % 2 == 0:
            c = CouplingParams.from_kappa(rng.uniform(0.1, 0.95))
            nu = ext.ExtensionParam.for_coupling(rng.uniform(-1.4, 1.4), c)
            mu = rng.uniform(ext.mu_min(nu), 1.45)
        else:
            c = CouplingParams.from_kappa(0.0)
            nu = ext.ExtensionParam.for_coupling(rng.uniform(-1.2, 1.2), c)
            mu = rng.uniform(0, 1.2)
        s = ext.s_of(mu, nu, c)
        theta = ext.theta_of(FactorizationParams(mu, s), c)
        worst = max(worst, abs(theta - nu.nu))
    checks = [_le("round trip |theta(mu, s(mu,nu)) - nu|, 200 pairs", worst, 1e-10)]
    monotone = True
    for kappa, nu_val in ((0.3, -0.7), (0.5, 0.2), (0.8, -1.2), (0.0, 0.4), (0.0, -0.9)):
        c = CouplingParams.from_kappa(kappa)
        nu = ext.ExtensionParam.for_coupling(nu_val, c)
        s = [ext.s_of(m, nu, c) for m in ext.admissible_mu_grid(nu, 40)]
        monotone &= bool(np.all(np.diff(s) > 0))
    checks.append(Check("s(mu, nu) strictly increasing in mu", float(monotone), 1.0, monotone))
    worst = 0.0
    for kappa, nu_val in ((0.5, -math.pi / 4), (0.25, -0.9), (0.75, -0.3), (0.0, 0.0), (0.0, -0.7), (0.0, 1.1)):
        c = CouplingParams.from_kappa(kappa)
        nu = ext.ExtensionParam.for_coupling(nu_val, c)
        rows = ext.representation_table(nu, c)
        best = next(r for r in rows if r.optimal)
        e = ext.ground_state(nu, c).energy
        worst = max(worst, abs(best.lower_bound - e) / abs(e))
    checks.append(_le("optimum-row bound vs ground-state energy (relative)", worst, 1e-12))
    return checks


def suite_zeros(seed: int = DEFAULT_SEED) -> list[Check]:
    checks = []
    for sigma in (0.5, 1.0, 2.0):
        c = CouplingParams.from_sigma(sigma)
        seq = ext.oscillation_zeros(c, 1.0, 0.3, (1e-40, 1e-5), tol=1e-9)
        ratios = seq.zeros[1:] / seq.zeros[:-1]
        dev = float(np.max(np.abs(ratios / seq.predicted_ratio - 1)))
        checks.append(_le(f"zero ratio vs exp(-pi/sigma), sigma={sigma} ({seq.zeros.size} zeros)",
                          dev, 1e-8))
    return checks


def continuity_gap(kappa: float, mu: float, s: float, x=None) -> float:
    """sup|phi(mu,s) - phi(mu,0)| / sup|phi(mu,0)| on x in [1e-4, 1]."""
    if x is None:
        x = np.geomspace(1e-4, 1.0, 400)
    c = CouplingParams.from_kappa(kappa)
    a = fz.phi(PhiFamily(c, FactorizationParams(mu, s)), x)
    b = fz.phi(PhiFamily(c, FactorizationParams(mu, 0.0)), x)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def suite_continuity(seed: int = DEFAULT_SEED) -> list[Check]:
    checks = []
    for kappa in (0.3, 1.0, 1.7):
        for mu, mu_label in ((0.0, "0"), (math.pi / 4, "pi/4"), (fz.HALF_PI, "pi/2")):
            gap = continuity_gap(kappa, mu, 1e-3)
            checks.append(_le(f"s->0 gap at s=1e-3, kappa={kappa} mu={mu_label}", gap, 1e-4))
    return checks


def suite_specfun(seed: int = DEFAULT_SEED) -> list[Check]:
    z = np.geomspace(1e-6, 50, 300)
    worst = 0.0
    for nu in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.5, 5.0):
        i, di, _ = specfun.bessel_i_set(nu, z, scaled=True)
        k, dk, _ = specfun.bessel_k_set(nu, z, scaled=True)
        worst = max(worst, float(np.max(np.abs(z * (i * dk - di * k) + 1))))
    checks = [_le("Wronskian |z (I K' - I' K) + 1|", worst, 1e-9)]
    pref_i = np.sqrt(2 / (np.pi * z))
    pref_k = np.sqrt(np.pi / (2 * z))
    pairs: list[tuple[str, Callable, np.ndarray, np.ndarray]] = [
        ("I_1/2", lambda: specfun.bessel_i(0.5, z).value, pref_i * np.sinh(z), z),
        ("I_-1/2", lambda: specfun.bessel_i(-0.5, z).value, pref_i * np.cosh(z), z),
        ("K_1/2", lambda: specfun.bessel_k(0.5, z).value, pref_k * np.exp(-z), z),
        ("K_3/2", lambda: specfun.bessel_k(1.5, z).value, pref_k * np.exp(-z) * (1 + 1 / z), z),
    ]
    worst = 0.0
    for _, fn, exact, _ in pairs:
        worst = max(worst, float(np.max(np.abs(fn() / exact - 1))))
    big = z[z >= 1]
    i32 = specfun.bessel_i(1.5, big).value
    exact32 = np.sqrt(2 / (np.pi * big)) * (np.cosh(big) - np.sinh(big) / big)
    worst = max(worst, float(np.max(np.abs(i32 / exact32 - 1))))
    checks.append(_le("half-order closed forms (relative)", worst, 1e-10))
    return checks


EXPONENT_WINDOW = (1e-8, 1e-5)


@dataclass(frozen=True)
class ExponentCase:
    label: str
    solver: str          # "b" or "a"
    kappa: float
    mu: float
    s: float
    eta: Callable
    constant: float
    expected: float
    log_profile: bool = False   # kappa = 0: expected is the slope of chi/sqrt(x) vs ln x


def _eta_zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _eta_smooth(x):
    x = np.asarray(x, dtype=float)
    return x * np.exp(-x)


def _eta_sharp(x):
    x = np.asarray(x, dtype=float)
    return x**-0.49 * np.exp(-x)


EXPONENT_CASES = (
    ExponentCase("b: eta=0, C=1, kappa=0.4, mu=0 (psi = 1/phi)", "b", 0.4, 0.0, 1.0, _eta_zero, 1.0, -0.1),
    ExponentCase("b: eta=x e^-x, C=0, kappa=0.4, mu=0, documented 1/2", "b", 0.4, 0.0, 1.0, _eta_smooth, 0.0, 0.5),
    ExponentCase("b: eta=x e^-x, C=0, kappa=0.4, mu=0, exact 2", "b", 0.4, 0.0, 1.0, _eta_smooth, 0.0, 2.0),
    ExponentCase("b: eta=x^-0.49 e^-x, C=0, kappa=0.4, mu=0 (bound attained)", "b", 0.4, 0.0, 1.0, _eta_sharp, 0.0, 0.51),
    ExponentCase("a: eta=0, D=1, kappa=0.4, mu=0", "a", 0.4, 0.0, 1.0, _eta_zero, 1.0, 0.1),
    ExponentCase("a: eta=x^-0.49 e^-x, D=0, kappa=0.4, mu=0", "a", 0.4, 0.0, 1.0, _eta_sharp, 0.0, 0.51),
    ExponentCase("a: eta=0, D=1, kappa=0, mu=0, slope of chi/sqrt(x) in ln x", "a", 0.0, 0.0, 1.0, _eta_zero, 1.0, -1.0, True),
    ExponentCase("a: eta=x e^-x, D=1, kappa=0, mu=0, slope of chi/sqrt(x) in ln x", "a", 0.0, 0.0, 1.0, _eta_smooth, 1.0, -1.0, True),
)


def fit_case(case: ExponentCase, window=EXPONENT_WINDOW) -> tuple[float, float]:
    """(fitted exponent or log slope, solver residual)."""
    fam = PhiFamily(CouplingParams.from_kappa(case.kappa), FactorizationParams(case.mu, case.s))
    grid = np.geomspace(window[0], window[1], 61)
    solve = fz.solve_inhomogeneous_b if case.solver == "b" else fz.solve_inhomogeneous_a
    sol = solve(fam, case.eta, case.constant, grid)
    if case.log_profile:
        _, slope = fz.fit_log_profile(grid, sol.psi.values, *window)
        return slope, sol.residual
    return fz.fit_power_exponent(grid, sol.psi.values, *window), sol.residual


def suite_inhomogeneous(seed: int = DEFAULT_SEED) -> list[Check]:
    checks = []
    for case in EXPONENT_CASES:
        fitted, residual = fit_case(case)
        rel = abs(fitted - case.expected) / abs(case.expected)
        checks.append(Check(case.label, fitted, 0.02, bool(rel <= 0.02 and residual <= 1e-8),
                            f"expected {case.expected}, relative deviation {rel:.3g}, "
                            f"solver residual {residual:.2g}"))
    return checks


SUITES: dict[str, Callable[[int], list[Check]]] = {
    "riccati": suite_riccati,
    "factorization": suite_factorization,
    "oracle": suite_oracle,
    "ground-state": suite_ground_state,
    "no-bound-state": suite_no_bound_state,
    "extensions": suite_extensions,
    "zeros": suite_zeros,
    "continuity": suite_continuity,
    "specfun": suite_specfun,
    "inhomogeneous": suite_inhomogeneous,
}

# acceptance criterion number -> suite name
CRITERIA = {
    1: "riccati",
    2: "factorization",
    3: "oracle",
    4: "ground-state",
    5: "no-bound-state",
    6: "extensions",
    7: "zeros",
    8: "continuity",
    9: "specfun",
    10: "inhomogeneous",
}
