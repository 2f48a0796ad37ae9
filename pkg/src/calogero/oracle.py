"""Independent shooting solver for -chi'' + alpha/x^2 chi = E chi on (0, inf).

Nothing here touches the Bessel code: the origin data come from Frobenius
series, the rest from an adaptive order-8 Runge-Kutta integrator.

Scheme (dimensionless xi = k0 x, q = -E/k0^2, kappa_E = sqrt(q)):

* outward from x0 to the matching point xi_m = 1/kappa_E, written as
  chi = a u1 + b u2 with the zero-energy solutions u1, u2 (variation of
  parameters); the slowly varying (a, b) are integrated in t = ln xi;
* inward from L = xi_m + 40/kappa_E down to xi_m, starting on the decaying
  branch (chi, chi') = (1, -kappa_E); integrating inward is the stable
  direction for this branch and the start error is damped by exp(-80);
* the mismatch is the Wronskian of the two pieces at xi_m, normalised by
  both Cauchy-data norms, so it is scale free, bounded by 1, continuous in E
  and vanishes exactly at eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .extensions import ExtensionParam, Regime, RegimeError, classify
from .factorization import CouplingParams

INWARD_DECAY_LENGTHS = 40.0


class OriginTooLargeError(ValueError):
    """x0 is outside the region where the origin expansion is accurate."""


class ConvergenceError(ArithmeticError):
    """Root polishing or integration failed."""


@dataclass(frozen=True)
class ShootingConfig:
    x0: float = 1e-4                  # units 1/k0
    rtol: float = 1e-12
    e_bracket: tuple[float, float] = (-1e4, -1e-8)   # units k0^2
    n_scan: int = 60
    max_iter: int = 200

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError("x0 must be > 0")
        if self.rtol > 1e-10:
            raise ValueError("rtol must be <= 1e-10")
        lo, hi = self.e_bracket
        if not lo < hi < 0:
            raise ValueError("e_bracket must satisfy lo < hi < 0")

    def refined(self) -> "ShootingConfig":
        return ShootingConfig(self.x0 / 2, self.rtol / 2, self.e_bracket, self.n_scan, self.max_iter)


@dataclass(frozen=True)
class SpectralResult:
    energy: float
    exists: bool
    bc_residual: float = 0.0
    decay_residual: float = 0.0
    n_iterations: int = 0
    sign_changes: int = 0


# ---------------------------------------------------------------------------
# Frobenius data at the origin


def _series(q: float, xi: float, shift: float, max_terms: int = 200) -> tuple[float, float, float]:
    """S = sum c_k xi^2k, c_k = c_{k-1} q / (4 k (k + shift)); returns (S, S', last term)."""
    w = xi * xi
    term = 1.0
    s, ds = 1.0, 0.0
    for k in range(1, max_terms):
        term *= q * w / (4 * k * (k + shift))
        s += term
        ds += 2 * k * term / xi
        if abs(term) <= 1e-18 * abs(s):
            break
    return s, ds, abs(term)


def _log_series(q: float, xi: float, max_terms: int = 200):
    """For kappa = 0: S = sum (q/4)^k xi^2k/(k!)^2 and T = -sum (q/4)^k H_k xi^2k/(k!)^2."""
    w = q * xi * xi / 4
    term = 1.0
    harmonic = 0.0
    s, ds, t, dt = 1.0, 0.0, 0.0, 0.0
    for k in range(1, max_terms):
        term *= w / (k * k)
        harmonic += 1.0 / k
        s += term
        ds += 2 * k * term / xi
        t -= harmonic * term
        dt -= 2 * k * harmonic * term / xi
        if abs(term) <= 1e-18 * abs(s):
            break
    return s, ds, t, dt, abs(term)


def _angles(nu: ExtensionParam) -> tuple[float, float]:
    if nu.regime is Regime.H1 or nu.friedrichs:
        return 1.0, 0.0
    return math.sin(nu.nu), math.cos(nu.nu)


def _start_coefficients(nu: ExtensionParam, coupling: CouplingParams, q: float,
                        xi0: float) -> tuple[float, float, float]:
    """(a, b, truncation) at xi0 for chi = a u1 + b u2, free of cancellation."""
    kappa = coupling.kappa
    sin_nu, cos_nu = _angles(nu)
    if kappa == 0:
        s, ds, t, dt, trunc = _log_series(q, xi0)
        ln = math.log(xi0)
        a_reg, b_reg = s - xi0 * ln * ds, xi0 * ds
        a_log = -xi0 * ln * ln * ds + t - xi0 * ln * dt
        b_log = s + xi0 * ln * ds + xi0 * dt
        return sin_nu * a_reg + cos_nu * a_log, sin_nu * b_reg + cos_nu * b_log, trunc
    sp, dsp, trunc_p = _series(q, xi0, kappa)
    a = sin_nu * (sp + xi0 * dsp / (2 * kappa))
    b = -sin_nu * xi0 ** (1 + 2 * kappa) * dsp / (2 * kappa)
    trunc = trunc_p
    if cos_nu != 0:
        sm, dsm, trunc_m = _series(q, xi0, -kappa)
        a += cos_nu * xi0 ** (1 - 2 * kappa) * dsm / (2 * kappa)
        b += cos_nu * (sm - xi0 * dsm / (2 * kappa))
        trunc = max(trunc, trunc_m)
    return a, b, trunc


def _basis(kappa: float, xi: float) -> tuple[float, float, float, float]:
    """Zero-energy solutions u1, u2 and their xi-derivatives."""
    if kappa == 0:
        r = math.sqrt(xi)
        ln = math.log(xi)
        return r, r * ln, 0.5 / r, (0.5 * ln + 1) / r
    u1 = xi ** (0.5 + kappa)
    u2 = xi ** (0.5 - kappa)
    return u1, u2, (0.5 + kappa) * u1 / xi, (0.5 - kappa) * u2 / xi


def origin_data(nu: ExtensionParam, coupling: CouplingParams, x0: float,
                energy: float = 0.0, series: bool = True, tol: float = 1e-8) -> tuple[float, float]:
    """Cauchy data (chi(x0), chi'(x0)) of the solution obeying the boundary condition.

    The solution is normalised as sin(nu) (k0 x)^(1/2+kappa) + cos(nu) (k0 x)^(1/2-kappa)
    (with sqrt(k0 x) and sqrt(k0 x) ln(k0 x) at kappa = 0).  ``series=True``
    includes the full Frobenius corrections at the given energy; otherwise the
    two-term form is returned and x0 must keep the neglected O(x^2) relative
    correction below ``tol``.
    """
    regime = classify(coupling)
    if regime is Regime.NO_FACTORIZATION:
        raise RegimeError("alpha < -1/4 has no semibounded boundary conditions")
    if nu.regime is not regime:
        raise RegimeError("extension regime does not match the coupling")
    k0 = coupling.k0
    xi0 = k0 * x0
    q = -energy / (k0 * k0)
    if not series:
        gap = max(1.0 - coupling.kappa, 1e-300) if coupling.kappa < 1 else 1.0
        correction = abs(q) * xi0 * xi0 / (4 * gap)
        if correction > tol:
            raise OriginTooLargeError(f"O(x^2) correction {correction:.3g} exceeds {tol:.3g}; reduce x0")
        q = 0.0
    a, b, _ = _start_coefficients(nu, coupling, q, xi0)
    u1, u2, d1, d2 = _basis(coupling.kappa, xi0)
    return a * u1 + b * u2, k0 * (a * d1 + b * d2)


# ---------------------------------------------------------------------------
# integration pieces


def _outward_rhs(kappa: float, q: float):
    if kappa == 0:
        def rhs(t, y):
            w = q * math.exp(2 * t)
            chi = y[0] + y[1] * t
            return [-w * t * chi, w * chi]
        return rhs
    c = q / (2 * kappa)

    def rhs(t, y):
        xi = math.exp(t)
        x2 = xi * xi
        p = xi ** (2 * kappa)
        return [c * (y[0] * x2 + y[1] * x2 / p), -c * (y[0] * x2 * p + y[1] * x2)]
    return rhs


def _new_solver(rhs, rtol: float):
    solver = integrate.ode(rhs)
    solver.set_integrator("dop853", rtol=rtol, atol=1e-300, nsteps=200000)
    return solver


def _outward(nu, coupling, q, xi0, xi_targets, rtol):
    """chi and chi' (in xi) at increasing xi_targets, plus the series truncation."""
    a, b, trunc = _start_coefficients(nu, coupling, q, xi0)
    solver = _new_solver(_outward_rhs(coupling.kappa, q), rtol)
    solver.set_initial_value([a, b], math.log(xi0))
    out = []
    for xi in xi_targets:
        t = math.log(xi)
        if t > solver.t:
            solver.integrate(t)
            if not solver.successful():
                raise ConvergenceError("outward integration failed")
        aa, bb = solver.y
        u1, u2, d1, d2 = _basis(coupling.kappa, xi)
        out.append((aa * u1 + bb * u2, aa * d1 + bb * d2))
    return out, trunc


def _inward(alpha: float, q: float, xi_m: float, rtol: float) -> tuple[float, float]:
    """(chi, chi'/kappa_E) at xi_m for the solution decaying at infinity."""
    kap = math.sqrt(q)

    def rhs(xi, y):
        return [kap * y[1], (alpha / (xi * xi) + q) * y[0] / kap]

    solver = _new_solver(rhs, rtol)
    solver.set_initial_value([1.0, -1.0], xi_m + INWARD_DECAY_LENGTHS / kap)
    solver.integrate(xi_m)
    if not solver.successful():
        raise ConvergenceError("inward integration failed")
    return float(solver.y[0]), float(solver.y[1])


def _check_inputs(nu: ExtensionParam, coupling: CouplingParams):
    regime = classify(coupling)
    if regime is Regime.NO_FACTORIZATION:
        raise RegimeError("alpha < -1/4: the operator is unbounded below; nothing to shoot for")
    if nu.regime is not regime:
        raise RegimeError("extension regime does not match the coupling")


def shoot(nu: ExtensionParam, coupling: CouplingParams, energy: float,
          config: ShootingConfig = ShootingConfig()) -> float:
    """Normalised Wronskian mismatch in [-1, 1]; zero iff energy is an eigenvalue."""
    return _shoot_detail(nu, coupling, energy, config)[0]


def _shoot_detail(nu, coupling, energy, config):
    _check_inputs(nu, coupling)
    if not energy < 0:
        raise ValueError("energy must be negative")
    k0 = coupling.k0
    q = -energy / (k0 * k0)
    kap = math.sqrt(q)
    xi0 = config.x0
    xi_m = max(1.0 / kap, 2 * xi0)
    pieces, trunc = _outward(nu, coupling, q, xi0, [xi_m], config.rtol)
    chi_o, dchi_o = pieces[0]
    chi_i, dchi_i = _inward(coupling.alpha, q, xi_m, config.rtol)
    dchi_o /= kap
    wr = chi_o * dchi_i - dchi_o * chi_i
    mismatch = wr / (math.hypot(chi_o, dchi_o) * math.hypot(chi_i, dchi_i))
    return mismatch, trunc


def _scan_energies(config: ShootingConfig, bracket: tuple[float, float] | None = None) -> np.ndarray:
    lo, hi = bracket if bracket is not None else config.e_bracket
    return -np.geomspace(-lo, -hi, config.n_scan)


def scan(nu: ExtensionParam, coupling: CouplingParams, config: ShootingConfig = ShootingConfig(),
         bracket: tuple[float, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mismatch on a geometric energy grid (most negative energy first), in units k0^2 scaled."""
    k0sq = coupling.k0**2
    energies = _scan_energies(config, bracket) * k0sq
    values = np.array([shoot(nu, coupling, e, config) for e in energies])
    return energies, values


def count_sign_changes(values) -> int:
    v = np.sign(np.asarray(values))
    v = v[v != 0]
    return int(np.count_nonzero(v[1:] != v[:-1]))


def find_bound_state(nu: ExtensionParam, coupling: CouplingParams,
                     config: ShootingConfig = ShootingConfig(),
                     bracket: tuple[float, float] | None = None) -> SpectralResult:
    """Lowest eigenvalue in the bracket, or exists=False when the mismatch keeps its sign."""
    energies, values = scan(nu, coupling, config, bracket)
    changes = count_sign_changes(values)
    idx = [i for i in range(len(values) - 1) if values[i] == 0 or values[i] * values[i + 1] < 0]
    if not idx:
        return SpectralResult(0.0, False, sign_changes=0)
    i = idx[0]
    if values[i] == 0:
        root, iters = float(energies[i]), 0
    else:
        try:
            root, info = optimize.brentq(lambda e: shoot(nu, coupling, e, config),
                                         energies[i], energies[i + 1], xtol=1e-15 * abs(energies[i]),
                                         rtol=4 * np.finfo(float).eps, maxiter=config.max_iter,
                                         full_output=True)
        except RuntimeError as exc:
            raise ConvergenceError(str(exc)) from exc
        iters = info.iterations
    mismatch, trunc = _shoot_detail(nu, coupling, root, config)
    return SpectralResult(float(root), True, bc_residual=float(trunc),
                          decay_residual=abs(float(mismatch)), n_iterations=iters,
                          sign_changes=changes)


def solution_profile(nu: ExtensionParam, coupling: CouplingParams, energy: float, x,
                     config: ShootingConfig = ShootingConfig()) -> np.ndarray:
    """Outward-integrated chi at the (increasing) points x >= x0, normalised as in origin_data."""
    _check_inputs(nu, coupling)
    k0 = coupling.k0
    q = -energy / (k0 * k0)
    xs = np.asarray(x, dtype=float) * k0
    out, _ = _outward(nu, coupling, q, config.x0, list(xs), config.rtol)
    return np.array([v for v, _ in out])
