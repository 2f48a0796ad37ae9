"""Positive zero-energy-shifted solutions phi(mu, s; x) and the ladder operations.

For the operation ``H = -d^2/dx^2 + alpha/x^2`` on the half-line every
positive solution ``phi`` of ``H phi = -(s k0)^2 phi`` yields the factorization

    H = b a - (s k0)^2,    a = d/dx - h,    b = -d/dx - h,    h = phi'/phi.

Internally everything is evaluated in the dimensionless variable
``xi = k0 * x``; public functions take dimensionful ``x`` and return
dimensionful ``h`` (inverse length) and ``h'`` (inverse length squared).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import specfun

HALF_PI = 0.5 * math.pi


class NoFactorizationError(ValueError):
    """alpha < -1/4: every real solution oscillates near the origin."""


class InvalidParamsError(ValueError):
    """Parameters outside the admissible family."""


class DerivativeMissingError(ValueError):
    """A sampled function lacks the derivative channel an operation needs."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


def _is_half_pi(mu: float) -> bool:
    return abs(mu - HALF_PI) <= 4 * np.finfo(float).eps


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class CouplingParams:
    """Coupling alpha, its derived order, and the scale k0.

    ``kappa = sqrt(alpha + 1/4)`` for alpha >= -1/4, otherwise
    ``sigma = sqrt(|alpha| - 1/4)``; exactly one of the two is set.
    """

    alpha: float
    k0: float = 1.0
    kappa: float | None = field(default=None)
    sigma: float | None = field(default=None)

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.k0 > 0 and math.isfinite(self.k0)):
            raise InvalidParamsError("alpha must be finite and k0 > 0")
        shifted = self.alpha + 0.25
        if self.kappa is None and self.sigma is None:
            if shifted >= 0:
                object.__setattr__(self, "kappa", math.sqrt(shifted))
            else:
                object.__setattr__(self, "sigma", math.sqrt(-shifted))
        if (self.kappa is None) == (self.sigma is None):
            raise InvalidParamsError("exactly one of kappa, sigma must be defined")

    @classmethod
    def from_alpha(cls, alpha: float, k0: float = 1.0) -> "CouplingParams":
        return cls(alpha=alpha, k0=k0)

    @classmethod
    def from_kappa(cls, kappa: float, k0: float = 1.0) -> "CouplingParams":
        if kappa < 0:
            raise InvalidParamsError("kappa must be >= 0")
        return cls(alpha=kappa * kappa - 0.25, k0=k0, kappa=kappa)

    @classmethod
    def from_sigma(cls, sigma: float, k0: float = 1.0) -> "CouplingParams":
        if sigma <= 0:
            raise InvalidParamsError("sigma must be > 0")
        return cls(alpha=-(sigma * sigma) - 0.25, k0=k0, sigma=sigma)

    @property
    def factorizable(self) -> bool:
        return self.kappa is not None


@dataclass(frozen=True)
class FactorizationParams:
    """Mixing angle mu in [0, pi/2] and dimensionless shift s >= 0."""

    mu: float
    s: float

    def __post_init__(self):
        if not (-1e-15 <= self.mu <= HALF_PI + 1e-15):
            raise InvalidParamsError(f"mu={self.mu} outside [0, pi/2]")
        if not (self.s >= 0 and math.isfinite(self.s)):
            raise InvalidParamsError(f"s={self.s} must be finite and >= 0")

    @property
    def sin_mu(self) -> float:
        return 1.0 if _is_half_pi(self.mu) else math.sin(self.mu)

    @property
    def cos_mu(self) -> float:
        return 0.0 if _is_half_pi(self.mu) else math.cos(self.mu)


@dataclass(frozen=True)
class PhiFamily:
    """One member phi(mu, s; x) of the positive-solution family."""

    coupling: CouplingParams
    params: FactorizationParams
    # coefficients of sqrt(xi) I(s xi) and sqrt(xi) K(s xi)
    _p: float = field(init=False, repr=False)
    _q: float = field(init=False, repr=False)

    def __post_init__(self):
        c = self.coupling
        if not c.factorizable:
            raise NoFactorizationError(
                "alpha < -1/4: no positive solution exists, every real solution "
                "has infinitely many zeros accumulating at the origin")
        kappa, s = c.kappa, self.params.s
        sin_mu, cos_mu = self.params.sin_mu, self.params.cos_mu
        if kappa == 0 and s == 0 and cos_mu != 0:
            raise InvalidParamsError(
                "kappa = 0, s = 0 admits only mu = pi/2 (sqrt(k0 x) is the unique positive solution)")
        if s > 0:
            if kappa == 0:
                p, q = sin_mu, cos_mu
            else:
                log_half_s = math.log(0.5 * s)
                p = sin_mu * math.exp(math.lgamma(1 + kappa) - kappa * log_half_s)
                q = cos_mu * 2.0 * math.exp(kappa * log_half_s - math.lgamma(kappa))
        else:
            p, q = sin_mu, cos_mu
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "_q", q)
        if 0 < kappa < 1e-3:
            warnings.warn("kappa < 1e-3: the family is badly conditioned near kappa = 0",
                          RuntimeWarning, stacklevel=2)

    @classmethod
    def create(cls, alpha: float, mu: float, s: float, k0: float = 1.0) -> "PhiFamily":
        return cls(CouplingParams.from_alpha(alpha, k0), FactorizationParams(mu, s))

    @property
    def kappa(self) -> float:
        return self.coupling.kappa

    @property
    def amp_tilde(self) -> float:
        """Coefficient of the (k0 x)^(1/2+kappa) (or sqrt(k0 x)) term at the origin."""
        kappa, s = self.kappa, self.params.s
        sin_mu, cos_mu = self.params.sin_mu, self.params.cos_mu
        if kappa == 0:
            if s == 0:
                return sin_mu
            return sin_mu + cos_mu * (specfun.digamma_one() - math.log(0.5 * s))
        if s == 0:
            return sin_mu
        if kappa >= 1:
            raise InvalidParamsError("amp_tilde is defined for 0 <= kappa < 1")
        ratio = math.exp(math.lgamma(1 - kappa) - math.lgamma(1 + kappa))
        return sin_mu - ratio * (0.5 * s) ** (2 * kappa) * cos_mu


# ---------------------------------------------------------------------------
# core evaluation


@dataclass
class _Profile:
    log_scale: np.ndarray  # phi = sqrt(xi) * exp(log_scale) * F
    f: np.ndarray
    dlog: np.ndarray       # phi'/phi in xi
    d2: np.ndarray         # phi''/phi in xi
    hp: np.ndarray = None  # (phi'/phi)' in xi

    def __post_init__(self):
        if self.hp is None:
            self.hp = self.d2 - self.dlog**2


def _xi(family: PhiFamily, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise specfun.DomainError("x must be finite and > 0")
    return family.coupling.k0 * arr


def _profile(family: PhiFamily, xi: np.ndarray) -> _Profile:
    kappa, s = family.kappa, family.params.s
    p, q = family._p, family._q
    if s == 0:
        if kappa == 0:
            ones = np.ones_like(xi)
            return _Profile(np.zeros_like(xi), ones, 0.5 / xi, -0.25 / xi**2)
        # phi = xi^(1/2-kappa) (q + p xi^(2 kappa))
        t = np.power(xi, 2 * kappa)
        f = q + p * t
        lo, hi = 0.5 - kappa, 0.5 + kappa
        dlog = (lo * q + hi * p * t) / (xi * f)
        w = p * t / f
        hp = (-lo - 2 * kappa * w + 4 * kappa * kappa * w * (1 - w)) / xi**2
        return _Profile((lo - 0.5) * np.log(xi), f, dlog, hp + dlog * dlog, hp)
    z = s * xi
    # Order ratios R = K_{kappa-1}/K_kappa and S = I_{kappa+1}/I_kappa give h for
    # each branch without the 1/xi cancellations of the plain derivative form.
    kk = specfun.bessel_k(kappa, z, scaled=True).value
    r = specfun.bessel_k(abs(kappa - 1.0), z, scaled=True).value / kk
    h_k = (0.5 - kappa) / xi - s * r
    hp_k = -(0.5 - kappa) / xi**2 - s * s * (r * r + (2 * kappa - 1) * r / z - 1.0)
    if p > 0:
        ii = specfun.bessel_i(kappa, z, scaled=True).value
        t = specfun.bessel_i(kappa + 1.0, z, scaled=True).value / ii
        h_i = (0.5 + kappa) / xi + s * t
        hp_i = -(0.5 + kappa) / xi**2 + s * s * (1.0 - (2 * kappa + 1) * t / z - t * t)
        # work with logs so that neither branch can underflow the sum
        la = math.log(p) + np.log(ii) + z
        if q > 0:
            log_scale = np.logaddexp(la, math.log(q) + np.log(kk) - z)
        else:
            log_scale = la
        f = np.ones_like(z)
        w = np.exp(la - log_scale)
        gap = h_i - h_k
        dlog = h_k + w * gap
        hp = (1 - w) * hp_k + w * hp_i + w * (1 - w) * gap * gap
    else:
        f = q * kk
        log_scale = -z
        dlog, hp = h_k, hp_k
    d2 = hp + dlog * dlog
    return _Profile(log_scale, f, dlog, d2, hp)


def _scalarize(value, x):
    return float(value) if np.ndim(x) == 0 else value


def phi(family: PhiFamily, x):
    """phi(mu, s; x).  Overflows to inf for s k0 x beyond ~700; see log_phi."""
    xi = _xi(family, x)
    prof = _profile(family, np.atleast_1d(xi))
    with np.errstate(over="ignore"):
        val = np.sqrt(np.atleast_1d(xi)) * np.exp(prof.log_scale) * prof.f
    return _scalarize(val.reshape(np.shape(xi)), x)


def log_phi(family: PhiFamily, x):
    """log phi; finite wherever phi > 0, no overflow."""
    xi = np.atleast_1d(_xi(family, x))
    prof = _profile(family, xi)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = 0.5 * np.log(xi) + prof.log_scale + np.log(prof.f)
    return _scalarize(val.reshape(np.shape(x)), x)


def positive_on(family: PhiFamily, x) -> bool:
    """True when phi > 0 at every sample of x."""
    xi = np.atleast_1d(_xi(family, x))
    prof = _profile(family, xi)
    with np.errstate(divide="ignore"):
        log_f = prof.log_scale + np.log(prof.f)
    return bool(np.all(prof.f > 0) and np.all(np.isfinite(log_f)))


def h(family: PhiFamily, x):
    """Logarithmic derivative phi'/phi (inverse length), from Bessel recurrences."""
    xi = _xi(family, x)
    prof = _profile(family, np.atleast_1d(xi))
    return _scalarize((family.coupling.k0 * prof.dlog).reshape(np.shape(xi)), x)


def h_prime(family: PhiFamily, x):
    """dh/dx = phi''/phi - h^2, with phi'' from second Bessel derivatives."""
    xi = _xi(family, x)
    prof = _profile(family, np.atleast_1d(xi))
    val = family.coupling.k0**2 * prof.hp
    return _scalarize(val.reshape(np.shape(xi)), x)


def h_limit_at_infinity(family: PhiFamily) -> float:
    """lim h(x) as x -> inf: +s k0 when the I_kappa branch is present, else -s k0."""
    sk = family.params.s * family.coupling.k0
    return sk if family.params.sin_mu > 0 else -sk


def riccati_residual(family: PhiFamily, grid) -> float:
    """max over grid of |h' + h^2 - alpha/x^2 - (s k0)^2| / max(1, (s k0)^2, |alpha|/x^2).

    The residual is normalised pointwise by the scale in the denominator
    (all quantities in units of k0^2), so the contract is a plain bound
    on the returned number.
    """
    x = np.asarray(grid, dtype=float)
    xi = _xi(family, x)
    prof = _profile(family, np.atleast_1d(xi))
    hh = prof.dlog
    hp = prof.hp
    alpha, s = family.coupling.alpha, family.params.s
    target = alpha / xi**2 + s * s
    scale = np.maximum.reduce([np.ones_like(xi), np.full_like(xi, s * s), np.abs(alpha) / xi**2])
    return float(np.max(np.abs(hp + hh * hh - target) / scale))


def log_grid(k0: float = 1.0, lo: float = 1e-8, hi: float = 1e3, per_decade: int = 400) -> np.ndarray:
    """Log-spaced abscissae over [lo, hi] in units of 1/k0."""
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n) / k0


# ---------------------------------------------------------------------------
# sampled functions and the first-order operations


@dataclass
class SampledFunction:
    grid: np.ndarray
    values: np.ndarray
    derivative: np.ndarray | None = None
    second: np.ndarray | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.grid <= 0):
            raise ValueError("grid must be positive")


def apply_a(family: PhiFamily, f: SampledFunction) -> SampledFunction:
    """a f = f' - h f.  Carries a derivative channel when f has a second derivative."""
    if f.derivative is None:
        raise DerivativeMissingError("apply_a needs f' on the grid")
    hh = h(family, f.grid)
    out = f.derivative - hh * f.values
    d_out = None
    if f.second is not None:
        d_out = f.second - h_prime(family, f.grid) * f.values - hh * f.derivative
    return SampledFunction(f.grid, out, d_out)


def apply_b(family: PhiFamily, f: SampledFunction) -> SampledFunction:
    """b f = -f' - h f."""
    if f.derivative is None:
        raise DerivativeMissingError("apply_b needs f' on the grid")
    hh = h(family, f.grid)
    out = -f.derivative - hh * f.values
    d_out = None
    if f.second is not None:
        d_out = -f.second - h_prime(family, f.grid) * f.values - hh * f.derivative
    return SampledFunction(f.grid, out, d_out)


@dataclass(frozen=True)
class Bump:
    """(1 - t^2)^4 with t = (x - center)/width; C^3, supported in (0, inf)."""

    center: float
    width: float

    def __post_init__(self):
        if not 0 < self.width < self.center:
            raise ValueError("bump support must lie inside (0, inf)")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.center) / self.width
        inside = np.abs(t) < 1
        u = np.where(inside, 1 - t * t, 0.0)
        w = self.width
        f = u**4
        f1 = -8 * t * u**3 / w
        f2 = (-8 * u**3 + 48 * t * t * u**2) / (w * w)
        return f, np.where(inside, f1, 0.0), np.where(inside, f2, 0.0)

    def sample(self, grid) -> SampledFunction:
        f, f1, f2 = self(grid)
        return SampledFunction(grid, f, f1, f2)

    def support_grid(self, n: int = 801) -> np.ndarray:
        return np.linspace(self.center - self.width, self.center + self.width, n)[1:-1]


def default_testset(k0: float = 1.0) -> list[Bump]:
    centers = (0.02, 0.2, 1.0, 4.0, 15.0)
    return [Bump(c / k0, 0.6 * c / k0) for c in centers]


def calogero_apply(coupling: CouplingParams, f: SampledFunction) -> np.ndarray:
    """H f = -f'' + alpha/x^2 f."""
    if f.second is None:
        raise DerivativeMissingError("H needs f'' on the grid")
    return -f.second + coupling.alpha / f.grid**2 * f.values


def factorization_residual(family: PhiFamily, testset: Sequence[Bump] | None = None,
                           n: int = 801) -> float:
    """max over the test functions of max|b a f - (s k0)^2 f - H f| / max|H f|."""
    k0 = family.coupling.k0
    if testset is None:
        testset = default_testset(k0)
    shift = (family.params.s * k0) ** 2
    worst = 0.0
    for bump in testset:
        f = bump.sample(bump.support_grid(n))
        baf = apply_b(family, apply_a(family, f)).values
        hf = calogero_apply(family.coupling, f)
        worst = max(worst, float(np.max(np.abs(baf - shift * f.values - hf)) / np.max(np.abs(hf))))
    return worst


# ---------------------------------------------------------------------------
# inhomogeneous first-order equations


@dataclass
class InhomSolution:
    psi: SampledFunction
    free_constant: float
    lower_limit: float
    residual: float


# depth of the origin piece in the log variable; contributions from below
# exp(-ORIGIN_DEPTH) * grid[0] are far beneath the tolerance for any
# integrand that is integrable at the origin with a margin
ORIGIN_DEPTH = 120.0


def _vectorized(fun: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(y):
        y = np.asarray(y, dtype=float)
        try:
            out = np.asarray(fun(y), dtype=float)
            if out.shape == y.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda v: float(fun(v)), otypes=[float])(y)
    return wrapped


def _quad_log(fun: Callable, t_lo: float, t_hi: float, epsabs: float) -> float:
    """Adaptive Gauss-Kronrod integral of fun(y) dy over t = ln y in [t_lo, t_hi]."""
    def g(t):
        y = math.exp(t)
        return float(fun(np.array([y]))[0]) * y

    with np.errstate(over="ignore", invalid="ignore"):
        out = integrate.quad(g, t_lo, t_hi, epsabs=epsabs, epsrel=1e-12, limit=400,
                             full_output=1)
    if len(out) == 4:
        raise QuadratureError(f"quadrature on ln-interval [{t_lo}, {t_hi}] failed: {out[3]}")
    return out[0]


def _cells_gl(fun: Callable, t_lo: np.ndarray, t_hi: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (t_hi + t_lo)
    half = 0.5 * (t_hi - t_lo)
    y = np.exp(mid[:, None] + half[:, None] * nodes[None, :])
    vals = fun(y.ravel()).reshape(y.shape) * y
    return (vals * weights[None, :]).sum(axis=1) * half


def _cell_integrals(fun: Callable, edges: np.ndarray, epsabs: float) -> np.ndarray:
    """Integrals over consecutive cells of a positive, increasing edge array.

    Two Gauss-Legendre orders are compared; cells where they disagree
    beyond the tolerance are redone with adaptive quadrature.
    """
    t = np.log(edges)
    lo, hi = t[:-1], t[1:]
    coarse = _cells_gl(fun, lo, hi, 20)
    fine = _cells_gl(fun, lo, hi, 30)
    bad = ~(np.abs(fine - coarse) <= np.maximum(epsabs, 1e-13 * np.abs(fine)))
    for i in np.flatnonzero(bad):
        fine[i] = _quad_log(fun, lo[i], hi[i], epsabs)
    return fine


def _cumulative(fun: Callable, grid: np.ndarray, x0: float, epsabs: float) -> np.ndarray:
    """[int_{x0}^{g} fun] for every g in the grid (x0 = 0 allowed)."""
    fun = _vectorized(fun)
    if x0 == 0:
        t0 = math.log(grid[0])
        head = _quad_log(fun, t0 - ORIGIN_DEPTH, t0, epsabs)
        cells = _cell_integrals(fun, grid, epsabs) if grid.size > 1 else np.empty(0)
        return head + np.concatenate(([0.0], np.cumsum(cells)))
    j = int(np.clip(np.searchsorted(grid, x0), 0, grid.size - 1))
    base = _quad_log(fun, math.log(x0), math.log(grid[j]), epsabs)
    cells = _cell_integrals(fun, grid, epsabs) if grid.size > 1 else np.empty(0)
    out = np.empty_like(grid)
    out[j] = base
    if j + 1 < grid.size:
        out[j + 1:] = base + np.cumsum(cells[j:])
    if j > 0:
        out[:j] = base - np.cumsum(cells[:j][::-1])[::-1]
    return out


def _gauss_check(fun: Callable, grid: np.ndarray) -> np.ndarray:
    # independent rule (different order, split cells) for the residual check
    fun = _vectorized(fun)
    t = np.log(grid)
    mid = 0.5 * (t[1:] + t[:-1])
    left = _cells_gl(fun, t[:-1], mid, 25)
    right = _cells_gl(fun, mid, t[1:], 25)
    return left + right


def _default_b_limit(family: PhiFamily) -> float:
    kappa = family.kappa
    if kappa < 1 or _is_half_pi(family.params.mu):
        return 0.0
    return 1.0 / family.coupling.k0


def _default_a_limit(family: PhiFamily) -> float:
    return 1.0 / family.coupling.k0 if _is_half_pi(family.params.mu) else 0.0


def solve_inhomogeneous_b(family: PhiFamily, eta: Callable, C: float, grid,
                          x0: float | None = None, epsabs: float = 1e-12) -> InhomSolution:
    """General solution of b psi = eta:  psi = (1/phi) [C - int_{x0}^x phi eta]."""
    grid = np.asarray(grid, dtype=float)
    if _is_half_pi(family.params.mu) and C != 0:
        raise InvalidParamsError("the free constant must vanish for mu = pi/2")
    if x0 is None:
        x0 = _default_b_limit(family)

    eta_v = _vectorized(eta)

    def integrand(y):
        return phi(family, y) * eta_v(y)

    cum = _cumulative(integrand, grid, x0, epsabs)
    ph = phi(family, grid)
    psi = (C - cum) / ph
    # integral identity: (phi psi)(x_{i+1}) - (phi psi)(x_i) = -int phi eta
    pp = ph * psi
    check = np.diff(pp) + _gauss_check(integrand, grid)
    scale = max(abs(C), float(np.max(np.abs(cum))), 1e-300)
    residual = float(np.max(np.abs(check)) / scale) if grid.size > 1 else 0.0
    deriv = -h(family, grid) * psi - eta_v(grid)
    return InhomSolution(SampledFunction(grid, psi, deriv), C, x0, residual)


def solve_inhomogeneous_a(family: PhiFamily, eta: Callable, D: float, grid,
                          x0: float | None = None, epsabs: float = 1e-12) -> InhomSolution:
    """General solution of a chi = eta:  chi = phi [D + int_{x0}^x eta/phi]."""
    grid = np.asarray(grid, dtype=float)
    mu_half = _is_half_pi(family.params.mu)
    if not mu_half and family.kappa >= 1 and D != 0:
        raise InvalidParamsError("the free constant must vanish for mu < pi/2, kappa >= 1")
    if x0 is None:
        x0 = _default_a_limit(family)

    eta_v = _vectorized(eta)

    def integrand(y):
        return eta_v(y) / phi(family, y)

    cum = _cumulative(integrand, grid, x0, epsabs)
    ph = phi(family, grid)
    chi = ph * (D + cum)
    check = np.diff(chi / ph) - _gauss_check(integrand, grid)
    scale = max(abs(D), float(np.max(np.abs(cum))), 1e-300)
    residual = float(np.max(np.abs(check)) / scale) if grid.size > 1 else 0.0
    deriv = h(family, grid) * chi + eta_v(grid)
    return InhomSolution(SampledFunction(grid, chi, deriv), D, x0, residual)


def fit_power_exponent(x, y, lo: float, hi: float) -> float:
    """Least-squares slope of log|y| against log x on [lo, hi]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 3:
        raise ValueError("fewer than three samples in the fit window")
    slope, _ = np.polyfit(np.log(x[sel]), np.log(np.abs(y[sel])), 1)
    return float(slope)


def fit_log_profile(x, y, lo: float, hi: float) -> tuple[float, float]:
    """Fit y / sqrt(x) = A + B ln x on [lo, hi]; returns (A, B)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (x >= lo) & (x <= hi)
    B, A = np.polyfit(np.log(x[sel]), y[sel] / np.sqrt(x[sel]), 1)
    return float(A), float(B)
