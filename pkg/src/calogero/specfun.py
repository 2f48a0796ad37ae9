"""Modified Bessel functions of real order, plus the gamma/digamma helpers.

Every routine accepts a scalar or an array argument ``z > 0`` and returns an
:class:`EvalResult` whose fields have the shape of ``z``.  With
``scaled=True`` the value is ``I(z) * exp(-z)`` or ``K(z) * exp(z)``, which
keeps large arguments finite.

Algorithms
----------
I_nu
    Ascending series (Neumaier-compensated) for ``z < z_switch(nu)``,
    Hankel asymptotic expansion beyond.
K_nu
    Temme's series for ``z <= 2`` and Steed's continued fraction for
    ``z > 2``, both at a reduced order ``|mu| <= 1/2``, followed by the
    (stable) forward order recurrence.  Integer and near-integer orders go
    through the same path, so there is no special logarithmic branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 12.0
EPS = np.finfo(float).eps
EULER_GAMMA = 0.57721566490153286061

# Taylor coefficients of 1/Gamma(z) about 0 (c_1 .. c_30).
_RGAMMA_COEFFS = (
    1.0,
    5.7721566490153286061e-1,
    -6.5587807152025388108e-1,
    -4.2002635034095235529e-2,
    1.665386113822914895e-1,
    -4.2197734555544336748e-2,
    -9.6219715278769735621e-3,
    7.2189432466630995424e-3,
    -1.1651675918590651121e-3,
    -2.1524167411495097282e-4,
    1.2805028238811618615e-4,
    -2.0134854780788238656e-5,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
)


class DomainError(ValueError):
    """Argument or order outside the supported domain."""


@dataclass(frozen=True)
class EvalResult:
    value: float | np.ndarray
    est_abs_error: float | np.ndarray

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class BesselOrder:
    """Non-negative Bessel order, validated on construction."""

    kappa: float

    def __post_init__(self):
        if not math.isfinite(self.kappa) or self.kappa < 0 or self.kappa > MAX_ORDER:
            raise DomainError(f"unsupported Bessel order {self.kappa!r}")

    def __float__(self) -> float:
        return float(self.kappa)


# ---------------------------------------------------------------------------
# gamma helpers


def gamma(x: float) -> float:
    return math.gamma(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _rgamma_one_plus(x: float) -> float:
    # 1/Gamma(1+x) for |x| <= 1/2 from the Taylor series of 1/Gamma.
    acc = 0.0
    for c in reversed(_RGAMMA_COEFFS):
        acc = acc * x + c
    return acc


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    """Gamma1, Gamma2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2."""
    mu2 = mu * mu
    # odd-index coefficients build Gamma2, even-index ones Gamma1
    g1 = 0.0
    for c in reversed(_RGAMMA_COEFFS[1::2]):
        g1 = g1 * mu2 + c
    g1 = -g1
    g2 = 0.0
    for c in reversed(_RGAMMA_COEFFS[0::2]):
        g2 = g2 * mu2 + c
    return g1, g2, g2 - mu * g1, g2 + mu * g1


def digamma(x: float) -> float:
    """psi(x) for x > 0: upward recurrence then the asymptotic series."""
    if not x > 0:
        raise DomainError("digamma implemented for x > 0 only")
    acc = 0.0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Bernoulli tail: 1/12, -1/120, 1/252, -1/240, 1/132, -691/32760, 1/12
    tail = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (
        1 / 240 - inv2 * (1 / 132 - inv2 * (691 / 32760 - inv2 / 12))))))
    return acc + math.log(x) - 0.5 / x - tail


def digamma_one() -> float:
    """psi(1) = -Euler's constant."""
    return digamma(1.0)


# ---------------------------------------------------------------------------
# argument handling


def _prepare(order, z):
    nu = float(order)
    if not math.isfinite(nu) or abs(nu) > MAX_ORDER:
        raise DomainError(f"unsupported Bessel order {order!r}")
    arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("Bessel argument must be finite and > 0")
    return nu, arr


def _finish(value, err, scalar):
    if scalar:
        return EvalResult(float(value), float(err))
    return EvalResult(value, err)


def _z_switch(nu: float) -> float:
    return max(20.0, 8.0 * (1.0 + abs(nu)))


# ---------------------------------------------------------------------------
# I_nu


def _i_series(nu: float, z: np.ndarray):
    """Ascending series, unscaled.  Returns (value, error estimate)."""
    if nu < 0 and nu == math.floor(nu):
        nu = -nu
    half = 0.5 * z
    q = half * half
    term = np.power(half, nu) * rgamma(nu + 1.0)
    total = term.copy()
    comp = np.zeros_like(z)
    abs_total = np.abs(term)
    k = 0
    kmin = max(0, int(-nu) + 2)
    while True:
        k += 1
        term = term * q / (k * (k + nu))
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        abs_total = abs_total + np.abs(term)
        if k > kmin and np.all(np.abs(term) <= 0.25 * EPS * np.abs(total)):
            break
        if k > 2000:  # pragma: no cover - z is bounded by z_switch
            raise ArithmeticError("I series failed to converge")
    value = total + comp
    err = 2.0 * np.abs(term) + (k + 4) * EPS * abs_total
    return value, err


def _i_asymptotic_scaled(nu: float, z: np.ndarray):
    """Hankel expansion of I_nu(z) exp(-z) for large z."""
    mu4 = 4.0 * nu * nu
    term = np.ones_like(z)
    total = term.copy()
    err = np.zeros_like(z)
    done = np.zeros(z.shape, dtype=bool)
    prev = np.abs(term)
    for k in range(1, 200):
        term = -term * (mu4 - (2 * k - 1) ** 2) / (8.0 * k * z)
        small = np.abs(term) <= 0.25 * EPS * np.abs(total)
        growing = np.abs(term) > prev
        stop = (small | growing) & ~done
        err = np.where(stop, np.abs(term), err)
        done |= stop
        total = np.where(done, total, total + term)
        prev = np.abs(term)
        if np.all(done):
            break
    pref = 1.0 / np.sqrt(2.0 * np.pi * z)
    return pref * total, pref * (err + 4 * EPS * np.abs(total))


def _i_values(nu: float, z: np.ndarray, scaled: bool):
    value = np.empty_like(z)
    err = np.empty_like(z)
    zs = _z_switch(nu)
    lo = z < zs
    if np.any(lo):
        v, e = _i_series(nu, z[lo])
        if scaled:
            f = np.exp(-z[lo])
            v, e = v * f, e * f
        value[lo], err[lo] = v, e
    hi = ~lo
    if np.any(hi):
        v, e = _i_asymptotic_scaled(nu, z[hi])
        if not scaled:
            f = np.exp(z[hi])
            v, e = v * f, e * f
        value[hi], err[hi] = v, e
    return value, err


def bessel_i(order, z, scaled: bool = False) -> EvalResult:
    """Modified Bessel function of the first kind I_order(z), z > 0."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    value, err = _i_values(nu, np.atleast_1d(arr), scaled)
    return _finish(value.reshape(arr.shape), err.reshape(arr.shape), scalar)


# ---------------------------------------------------------------------------
# K_nu


def _k_temme(mu: float, z: np.ndarray):
    """K_mu and K_{mu+1} (unscaled) for z <= 2, |mu| <= 1/2."""
    g1, g2, gampl, gammi = _temme_gammas(mu)
    x2 = 0.5 * z
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    fact2 = np.where(np.abs(e) < EPS, 1.0, np.sinh(e) / np.where(e == 0, 1.0, e))
    ff = fact * (g1 * np.cosh(e) + g2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(z)
    dd = x2 * x2
    total1 = p.copy()
    mu2 = mu * mu
    for i in range(1, 500):
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total = total + delta
        total1 = total1 + c * (p - i * ff)
        if np.all(np.abs(delta) < np.abs(total) * EPS):
            break
    return total, total1 * (2.0 / z)


def _k_steed_scaled(mu: float, z: np.ndarray):
    """K_mu exp(z), K_{mu+1} exp(z) for z > 2 via Steed's continued fraction."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25 - mu2
    q = np.full_like(z, a1)
    c = np.full_like(z, a1)
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(z.shape, dtype=bool)
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        dels = q * delh
        h = np.where(done, h, h + delh)
        s = np.where(done, s, s + dels)
        done |= np.abs(dels) < np.abs(s) * EPS
        if np.all(done):
            break
        # keep the unbounded auxiliary sequence in range
        scale = np.maximum(np.abs(c), 1.0)
        c, q1, q2, q = c / scale, q1 * scale, q2 * scale, q
    else:  # pragma: no cover
        raise ArithmeticError("Steed continued fraction failed to converge")
    h = a1 * h
    kmu = np.sqrt(np.pi / (2.0 * z)) / s
    return kmu, kmu * (mu + z + 0.5 - h) / z


def _k_ladder(nu: float, z: np.ndarray, n: int, scaled: bool) -> list[np.ndarray]:
    """[K_nu, K_{nu+1}, ..., K_{nu+n}] for nu >= 0."""
    nl = int(nu + 0.5)
    mu = nu - nl
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    lo = z <= 2.0
    if np.any(lo):
        a, b = _k_temme(mu, z[lo])
        if scaled:
            f = np.exp(z[lo])
            a, b = a * f, b * f
        k0[lo], k1[lo] = a, b
    hi = ~lo
    if np.any(hi):
        a, b = _k_steed_scaled(mu, z[hi])
        if not scaled:
            f = np.exp(-z[hi])
            a, b = a * f, b * f
        k0[hi], k1[hi] = a, b
    # forward recurrence is stable for K
    out = []
    cur_mu = mu
    for j in range(nl + n):
        if j >= nl:
            out.append(k0)
        k0, k1 = k1, k0 + (2.0 * (cur_mu + 1.0) / z) * k1
        cur_mu += 1.0
    out.append(k0)
    if len(out) < n + 1:
        out.append(k1)
    return out[: n + 1]


def _k_err(values: np.ndarray, nu: float) -> np.ndarray:
    return (16.0 + 2.0 * nu) * EPS * np.abs(values)


def bessel_k(order, z, scaled: bool = False) -> EvalResult:
    """Macdonald function K_order(z), z > 0; K_{-nu} = K_nu."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    nu = abs(nu)
    (value,) = _k_ladder(nu, np.atleast_1d(arr), 0, scaled)
    return _finish(value.reshape(arr.shape), _k_err(value, nu).reshape(arr.shape), scalar)


# ---------------------------------------------------------------------------
# derivatives with respect to the argument


def bessel_i_prime(order, z, scaled: bool = False) -> EvalResult:
    """I'_nu(z) = I_{nu+1}(z) + (nu/z) I_nu(z)."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    if abs(nu + 1.0) > MAX_ORDER:
        raise DomainError(f"unsupported Bessel order {order!r}")
    zz = np.atleast_1d(arr)
    i0, e0 = _i_values(nu, zz, scaled)
    i1, e1 = _i_values(nu + 1.0, zz, scaled)
    value = i1 + (nu / zz) * i0
    err = e1 + abs(nu) / zz * e0 + 4 * EPS * np.abs(value)
    return _finish(value.reshape(arr.shape), err.reshape(arr.shape), scalar)


def bessel_k_prime(order, z, scaled: bool = False) -> EvalResult:
    """K'_nu(z) = -K_{nu+1}(z) + (nu/z) K_nu(z)."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    nu = abs(nu)
    zz = np.atleast_1d(arr)
    k0, k1 = _k_ladder(nu, zz, 1, scaled)
    value = -k1 + (nu / zz) * k0
    err = _k_err(k1, nu) + nu / zz * _k_err(k0, nu) + 4 * EPS * np.abs(value)
    return _finish(value.reshape(arr.shape), err.reshape(arr.shape), scalar)


def bessel_i_second(order, z, scaled: bool = False) -> EvalResult:
    """I''_nu(z) from the orders nu, nu+1, nu+2 (no use of the ODE itself)."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    if abs(nu + 2.0) > MAX_ORDER:
        raise DomainError(f"unsupported Bessel order {order!r}")
    zz = np.atleast_1d(arr)
    i0, e0 = _i_values(nu, zz, scaled)
    i1, e1 = _i_values(nu + 1.0, zz, scaled)
    i2, e2 = _i_values(nu + 2.0, zz, scaled)
    c1 = (2.0 * nu + 1.0) / zz
    c0 = (nu * nu - nu) / (zz * zz)
    value = i2 + c1 * i1 + c0 * i0
    err = e2 + np.abs(c1) * e1 + np.abs(c0) * e0 + 4 * EPS * np.abs(value)
    return _finish(value.reshape(arr.shape), err.reshape(arr.shape), scalar)


def bessel_k_second(order, z, scaled: bool = False) -> EvalResult:
    """K''_nu(z) from the orders nu, nu+1, nu+2."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(order, z)
    nu = abs(nu)
    zz = np.atleast_1d(arr)
    k0, k1, k2 = _k_ladder(nu, zz, 2, scaled)
    c1 = (2.0 * nu + 1.0) / zz
    c0 = (nu * nu - nu) / (zz * zz)
    value = k2 - c1 * k1 + c0 * k0
    err = (_k_err(k2, nu) + c1 * _k_err(k1, nu) + np.abs(c0) * _k_err(k0, nu)
           + 4 * EPS * np.abs(value))
    return _finish(value.reshape(arr.shape), err.reshape(arr.shape), scalar)


def bessel_k_set(order, z, scaled: bool = False):
    """(K, K', K'') at once, sharing a single order ladder."""
    nu, arr = _prepare(order, z)
    nu = abs(nu)
    zz = np.atleast_1d(arr)
    k0, k1, k2 = _k_ladder(nu, zz, 2, scaled)
    d1 = -k1 + (nu / zz) * k0
    d2 = k2 - ((2.0 * nu + 1.0) / zz) * k1 + ((nu * nu - nu) / (zz * zz)) * k0
    return tuple(v.reshape(arr.shape) for v in (k0, d1, d2))


def bessel_i_set(order, z, scaled: bool = False):
    """(I, I', I'') at once."""
    nu, arr = _prepare(order, z)
    if abs(nu + 2.0) > MAX_ORDER:
        raise DomainError(f"unsupported Bessel order {order!r}")
    zz = np.atleast_1d(arr)
    i0, _ = _i_values(nu, zz, scaled)
    i1, _ = _i_values(nu + 1.0, zz, scaled)
    i2, _ = _i_values(nu + 2.0, zz, scaled)
    d1 = i1 + (nu / zz) * i0
    d2 = i2 + ((2.0 * nu + 1.0) / zz) * i1 + ((nu * nu - nu) / (zz * zz)) * i0
    return tuple(v.reshape(arr.shape) for v in (i0, d1, d2))
