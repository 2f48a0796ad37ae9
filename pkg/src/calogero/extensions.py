"""Self-adjoint Calogero Hamiltonians labelled by the extension angle nu.

Regimes by coupling:

* ``H1``  kappa >= 1: a unique self-adjoint operator, spectrum [0, inf).
* ``H2``  0 < kappa < 1: a one-parameter family ``H2(nu)``; a single negative
  level exists exactly when nu < 0.
* ``H3``  kappa = 0: a family ``H3(nu)``; a negative level for every |nu| < pi/2.
* alpha < -1/4: no factorization at all; solutions oscillate infinitely often
  near the origin (see :func:`oscillation_zeros`).

Energies are in units of k0^2 scaled by k0 explicitly, lengths in 1/k0.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, optimize

from . import specfun
from .factorization import (
    HALF_PI,
    CouplingParams,
    FactorizationParams,
    InvalidParamsError,
    _is_half_pi,
)

SMALL_KAPPA = 1e-3


class Regime(enum.Enum):
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"
    NO_FACTORIZATION = "NoFactorization"


class RegimeError(ValueError):
    """Operation not defined for this coupling regime."""


class WindowTooLargeError(ValueError):
    """The requested window leaves the small-x asymptotic region."""


def classify(coupling: CouplingParams) -> Regime:
    if not coupling.factorizable:
        return Regime.NO_FACTORIZATION
    if coupling.kappa == 0:
        return Regime.H3
    if coupling.kappa < 1:
        return Regime.H2
    return Regime.H1


def _warn_small_kappa(coupling: CouplingParams) -> None:
    if coupling.kappa is not None and 0 < coupling.kappa < SMALL_KAPPA:
        warnings.warn(f"kappa = {coupling.kappa:g} < {SMALL_KAPPA:g}: extension formulas are "
                      "badly conditioned; the kappa = 0 formulas are not substituted",
                      RuntimeWarning, stacklevel=3)


@dataclass(frozen=True)
class ExtensionParam:
    """Extension angle nu together with its regime.

    nu = +pi/2 and nu = -pi/2 label the same operator and are stored as +pi/2.
    In regime H1 there is no free angle and nu is None.
    """

    nu: float | None
    regime: Regime

    def __post_init__(self):
        if self.regime is Regime.NO_FACTORIZATION:
            raise RegimeError("no self-adjoint family is parametrised here for alpha < -1/4")
        if self.regime is Regime.H1:
            if self.nu is not None:
                raise RegimeError("H1 is unique; it takes no extension angle")
            return
        if self.nu is None or not math.isfinite(self.nu):
            raise InvalidParamsError("nu is required in regimes H2 and H3")
        if abs(self.nu) > HALF_PI + 1e-12:
            raise InvalidParamsError(f"nu={self.nu} outside [-pi/2, pi/2]")
        if _is_half_pi(abs(self.nu)) or abs(abs(self.nu) - HALF_PI) <= 1e-12:
            object.__setattr__(self, "nu", HALF_PI)

    @classmethod
    def for_coupling(cls, nu: float | None, coupling: CouplingParams) -> "ExtensionParam":
        return cls(nu, classify(coupling))

    @property
    def friedrichs(self) -> bool:
        """True for the nu = +-pi/2 member (spectrum [0, inf))."""
        return self.nu is not None and self.nu == HALF_PI

    def label(self) -> str:
        if self.regime is Regime.H1:
            return "H1"
        nu = "±π/2" if self.friedrichs else f"{self.nu:.15g}"
        return f"{self.regime.value}(nu={nu})"


def _check_family_regime(coupling: CouplingParams) -> Regime:
    regime = classify(coupling)
    if regime not in (Regime.H2, Regime.H3):
        raise RegimeError(f"regime {regime.value} has no extension angle")
    _warn_small_kappa(coupling)
    return regime


def _log_gamma_ratio(kappa: float) -> float:
    # ln[Gamma(1 - kappa) / Gamma(1 + kappa)]
    return math.lgamma(1 - kappa) - math.lgamma(1 + kappa)


def theta_of(params: FactorizationParams, coupling: CouplingParams) -> float:
    """Extension angle induced by the factorization parameters (mu, s)."""
    regime = _check_family_regime(coupling)
    if _is_half_pi(params.mu):
        raise InvalidParamsError("theta is undefined at mu = pi/2 (it maps to nu = ±pi/2)")
    tan_mu = math.tan(params.mu)
    s = params.s
    if regime is Regime.H3:
        if s <= 0:
            raise InvalidParamsError("kappa = 0 requires s > 0 for mu < pi/2")
        return math.atan(math.log(0.5 * s) - tan_mu - specfun.digamma_one())
    if s == 0:
        return math.atan(tan_mu)
    kappa = coupling.kappa
    shift = math.exp(_log_gamma_ratio(kappa) + 2 * kappa * math.log(0.5 * s))
    return math.atan(tan_mu - shift)


def mu_min(nu: ExtensionParam) -> float:
    """Smallest admissible mu for the given extension (optimum representation)."""
    if nu.regime is Regime.H1:
        return 0.0
    if nu.friedrichs:
        return HALF_PI
    if nu.regime is Regime.H2 and nu.nu >= 0:
        return nu.nu
    return 0.0


def s_of(mu: float, nu: ExtensionParam, coupling: CouplingParams) -> float:
    """The unique s >= 0 with theta(mu, s) = nu."""
    regime = _check_family_regime(coupling)
    if nu.regime is not regime:
        raise RegimeError("extension regime does not match the coupling")
    if nu.friedrichs:
        raise InvalidParamsError("nu = ±pi/2 is realised by mu = pi/2 with any s >= 0")
    if not 0 <= mu < HALF_PI or _is_half_pi(mu):
        raise InvalidParamsError(f"mu={mu} outside [0, pi/2)")
    tan_mu, tan_nu = math.tan(mu), math.tan(nu.nu)
    if regime is Regime.H3:
        return 2.0 * math.exp(tan_nu + tan_mu + specfun.digamma_one())
    gap = tan_mu - tan_nu
    if gap < 0:
        raise InvalidParamsError(f"tan(mu) < tan(nu): mu={mu} is below mu_min={mu_min(nu)}")
    if gap == 0:
        return 0.0
    kappa = coupling.kappa
    log_half_s = (math.log(gap) - _log_gamma_ratio(kappa)) / (2 * kappa)
    try:
        return 2.0 * math.exp(log_half_s)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# ground state


@dataclass(frozen=True)
class GroundState:
    """Negative level and its normalised eigenfunction (if it exists).

    ``energy`` is 0 when there is no bound state; it then denotes the lower
    boundary of the spectrum.
    """

    energy: float
    exists: bool
    coupling: CouplingParams
    norm: float = 0.0
    order: float = 0.0

    @property
    def decay_rate(self) -> float:
        return math.sqrt(-self.energy)

    def _check(self):
        if not self.exists:
            raise RegimeError("no bound state: there is no wavefunction")

    def wavefunction(self, x):
        """U(x) = N sqrt(x) K(sqrt|E| x)."""
        return self.derivatives(x)[0]

    def derivatives(self, x):
        """(U, U', U'') from analytic Bessel derivatives."""
        self._check()
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        q = self.decay_rate
        z = q * xa
        k, k1, k2 = specfun.bessel_k_set(self.order, z, scaled=True)
        damp = np.exp(-z)
        k, k1, k2 = k * damp, k1 * damp, k2 * damp
        rt = np.sqrt(xa)
        u = self.norm * rt * k
        u1 = self.norm * (0.5 / rt * k + rt * q * k1)
        u2 = self.norm * (-0.25 * xa**-1.5 * k + q / rt * k1 + rt * q * q * k2)
        if np.ndim(x) == 0:
            return float(u[0]), float(u1[0]), float(u2[0])
        return u, u1, u2

    def normalization(self, cutoff: float = 40.0) -> float:
        """Integral of U^2 over (0, cutoff/sqrt|E|), adaptive in t = ln x."""
        self._check()
        q = self.decay_rate
        # in t = ln(q x) the integrand is N^2 q^-2 (q x)^2 K(qx)^2
        def g(t):
            z = math.exp(t)
            kz = float(specfun.bessel_k(self.order, z))
            return z * z * kz * kz

        t0 = -40.0
        pieces = [(t0, -5.0), (-5.0, 0.0), (0.0, math.log(cutoff))]
        total = 0.0
        for lo, hi in pieces:
            total += integrate.quad(g, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        if self.order > 0:
            # below t0, K(z) = Gamma(kappa)/2 (z/2)^-kappa to far better than double precision
            nu = self.order
            c = (0.5 * math.gamma(nu)) ** 2 * 4.0**nu
            total += c * math.exp((2 - 2 * nu) * t0) / (2 - 2 * nu)
        return self.norm**2 * total / (q * q)

    def eigen_residual(self, x) -> float:
        """max|-U'' + alpha/x^2 U - E U| / (|E| max|U|) on the given mesh."""
        self._check()
        xa = np.asarray(x, dtype=float)
        u, _, u2 = self.derivatives(xa)
        res = -u2 + self.coupling.alpha / xa**2 * u - self.energy * u
        return float(np.max(np.abs(res)) / (abs(self.energy) * np.max(np.abs(u))))


def ground_state(nu: ExtensionParam, coupling: CouplingParams) -> GroundState:
    """Closed-form ground state of the extension nu."""
    regime = classify(coupling)
    if regime is Regime.NO_FACTORIZATION:
        raise RegimeError("alpha < -1/4: the operator is unbounded below")
    if nu.regime is not regime:
        raise RegimeError("extension regime does not match the coupling")
    k0 = coupling.k0
    if regime is Regime.H1 or nu.friedrichs:
        return GroundState(0.0, False, coupling)
    _warn_small_kappa(coupling)
    if regime is Regime.H3:
        log_q = math.log(2 * k0) + math.tan(nu.nu) + specfun.digamma_one()
        q = math.exp(log_q)
        return GroundState(-q * q, True, coupling, norm=math.sqrt(2.0) * q, order=0.0)
    if nu.nu >= 0:
        return GroundState(0.0, False, coupling)
    kappa = coupling.kappa
    log_q = math.log(2 * k0) + (math.log(-math.tan(nu.nu)) - _log_gamma_ratio(kappa)) / (2 * kappa)
    q = math.exp(log_q)
    norm = math.sqrt(2 * math.sin(math.pi * kappa) / (math.pi * kappa)) * q
    return GroundState(-q * q, True, coupling, norm=norm, order=kappa)


# ---------------------------------------------------------------------------
# representation families


@dataclass(frozen=True)
class RepresentationRow:
    mu: float
    s: float
    lower_bound: float
    optimal: bool = False


DEFAULT_S_SAMPLES = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)


def representation_table(nu: ExtensionParam, coupling: CouplingParams,
                         mu_samples: Iterable[float] | None = None,
                         s_samples: Sequence[float] = DEFAULT_S_SAMPLES) -> list[RepresentationRow]:
    """Factorizations realising the extension nu, with lower bound -(s k0)^2.

    For H1 and for nu = ±pi/2 every s is admissible (mu free in H1, mu = pi/2
    otherwise) and ``s_samples`` is used; elsewhere s = s(mu, nu).  The row
    with the smallest s is flagged optimal.
    """
    regime = classify(coupling)
    if nu.regime is not regime:
        raise RegimeError("extension regime does not match the coupling")
    k0 = coupling.k0
    rows: list[tuple[float, float]] = []
    if regime is Regime.H1:
        mus = list(mu_samples) if mu_samples is not None else [0.0, math.pi / 4, HALF_PI]
        for mu in mus:
            FactorizationParams(mu, 0.0)
            rows.extend((mu, s) for s in s_samples)
    elif nu.friedrichs:
        rows.extend((HALF_PI, s) for s in s_samples)
    else:
        mus = list(mu_samples) if mu_samples is not None else admissible_mu_grid(nu, 16)
        rows.extend((mu, s_of(mu, nu, coupling)) for mu in mus)
    if not rows:
        return []
    best = min(range(len(rows)), key=lambda i: rows[i][1])
    return [RepresentationRow(mu, s, 0.0 - (s * k0) ** 2, i == best) for i, (mu, s) in enumerate(rows)]


def admissible_mu_grid(nu: ExtensionParam, n: int, mu_max: float = 1.5) -> list[float]:
    """n increasing mu values from mu_min(nu) up to mu_max (< pi/2)."""
    lo = mu_min(nu)
    if nu.friedrichs:
        return [HALF_PI]
    return list(np.linspace(lo, max(lo, mu_max), n))


# ---------------------------------------------------------------------------
# alpha < -1/4: oscillation near the origin


@dataclass(frozen=True)
class ZeroSequence:
    zeros: np.ndarray        # strictly decreasing
    ratio_estimate: float
    predicted_ratio: float
    correction_bound: float


def _osc_series(sigma: float, z: np.ndarray) -> np.ndarray:
    # sum_k (z^2/4)^k / (k! (1 + i sigma)_k), the regular oscillating solution over z^(i sigma)
    z = np.asarray(z, dtype=float)
    w = z * z / 4
    term = np.ones_like(z, dtype=complex)
    total = term.copy()
    for k in range(1, 200):
        term = term * w / (k * (k + 1j * sigma))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def oscillating_phi(coupling: CouplingParams, s: float, phase: float, x):
    """Real solution of H u = -(s k0)^2 u for alpha < -1/4.

    Normalised so that u = sqrt(k0 x) [cos(sigma ln(s k0 x) + phase) + O(x^2)].
    """
    if coupling.factorizable:
        raise RegimeError("oscillating solutions exist only for alpha < -1/4")
    sigma = coupling.sigma
    xi = coupling.k0 * np.asarray(x, dtype=float)
    z = s * xi
    ser = _osc_series(sigma, np.atleast_1d(z)).reshape(np.shape(z))
    val = np.sqrt(xi) * np.real(np.exp(1j * (sigma * np.log(z) + phase)) * ser)
    return float(val) if np.ndim(x) == 0 else val


def oscillation_zeros(coupling: CouplingParams, s: float, phase: float,
                      window: tuple[float, float], tol: float = 1e-6) -> ZeroSequence:
    """Zeros of :func:`oscillating_phi` inside the window, largest first.

    The leading-order zeros are x_n = exp((pi/2 + n pi - phase)/sigma)/(s k0);
    each is polished by Brent's method on the convergent series.  Windows whose
    upper end makes the O(x^2) correction exceed ``tol`` are rejected.
    """
    if coupling.factorizable:
        raise RegimeError("alpha >= -1/4: solutions have no accumulating zeros at the origin")
    if s <= 0:
        raise InvalidParamsError("s must be > 0")
    x_lo, x_hi = window
    if not 0 < x_lo < x_hi:
        raise InvalidParamsError("window must satisfy 0 < x_lo < x_hi")
    sigma, k0 = coupling.sigma, coupling.k0
    z_hi = s * k0 * x_hi
    bound = z_hi * z_hi / (4 * math.sqrt(1 + sigma * sigma))
    if bound > tol:
        raise WindowTooLargeError(
            f"correction bound {bound:.3g} exceeds {tol:.3g}; shrink x_hi below "
            f"{math.sqrt(4 * tol * math.sqrt(1 + sigma * sigma)) / (s * k0):.3g}")
    n_hi = math.floor((sigma * math.log(z_hi) + phase - HALF_PI) / math.pi)
    n_lo = math.ceil((sigma * math.log(s * k0 * x_lo) + phase - HALF_PI) / math.pi)

    def u_log(t):
        return oscillating_phi(coupling, s, phase, math.exp(t))

    zeros = []
    half = 0.5 * math.pi / sigma
    for n in range(n_hi, n_lo - 1, -1):
        t_pred = (HALF_PI + n * math.pi - phase) / sigma - math.log(s * k0)
        root = optimize.brentq(u_log, t_pred - half, t_pred + half, xtol=1e-15)
        x = math.exp(root)
        if x_lo <= x <= x_hi:
            zeros.append(x)
    zeros_arr = np.array(zeros)
    predicted = math.exp(-math.pi / sigma)
    ratio = float(zeros_arr[-1] / zeros_arr[-2]) if zeros_arr.size >= 2 else float("nan")
    return ZeroSequence(zeros_arr, ratio, predicted, bound)
