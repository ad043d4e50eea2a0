"""Meromorphic continuation of Mellin transforms.

For ``f`` with a small-t expansion ``sum c t^alpha (log t)^j`` and
exponential decay at infinity, the Mellin transform

    M(s) = int_0^inf f(t) t^(s-1) dt

is continued to all of C by splitting at ``T``: the expansion terms are
integrated over ``[0, T]`` in closed form, the remainder ``f - expansion``
numerically over ``[0, T]``, and ``f`` itself numerically over ``[T, inf)``.
The same split gives the Laurent coefficients of ``M`` at ``s = 0``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache

import numpy as np
from scipy import integrate

from .errors import (
    DivergentTail,
    NonpositiveT,
    PoleAtOne,
    PoleTooDeep,
    QuadratureFailure,
)

EULER_GAMMA = 0.57721566490153286060651209008240243
QUAD_TOL = 1e-11
LAURENT_ORDER = 4


# -- data types --------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticExpansion:
    """``sum c t^alpha (log t)^j + O(t^remainder_exponent)`` as t -> 0+.

    ``remainder_exponent = inf`` marks an exponentially small remainder.
    """

    terms: tuple = ()
    remainder_exponent: float = math.inf

    def __post_init__(self):
        terms = tuple(sorted((float(a), int(j), float(c)) for a, j, c in self.terms))
        keys = [(a, j) for a, j, _ in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (alpha, j) pairs in expansion")
        if any(j < 0 for _, j, _ in terms):
            raise ValueError("log powers must be non-negative")
        if terms and not self.remainder_exponent > max(a for a, _, _ in terms):
            raise ValueError("remainder exponent must exceed every term exponent")
        object.__setattr__(self, "terms", terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        logt = np.log(t)
        for a, j, c in self.terms:
            out = out + c * t**a * logt**j
        return out if out.ndim else float(out)

    def __add__(self, other: AsymptoticExpansion) -> AsymptoticExpansion:
        acc: dict = {}
        for a, j, c in self.terms + other.terms:
            acc[(a, j)] = acc.get((a, j), 0.0) + c
        return AsymptoticExpansion(
            tuple((a, j, c) for (a, j), c in acc.items()),
            min(self.remainder_exponent, other.remainder_exponent),
        )

    def scaled(self, factor: float) -> AsymptoticExpansion:
        return AsymptoticExpansion(tuple((a, j, factor * c) for a, j, c in self.terms), self.remainder_exponent)

    def coefficient(self, alpha: float, j: int = 0) -> float:
        return sum(c for a, jj, c in self.terms if a == alpha and jj == j)


@dataclass(frozen=True)
class DecayCertificate:
    """|f(t)| <= constant * exp(-rate * t) for all t >= valid_from."""

    rate: float
    constant: float
    valid_from: float = 1.0

    def __post_init__(self):
        if not (self.rate > 0 and self.constant >= 0 and self.valid_from >= 0):
            raise ValueError("decay certificate needs rate > 0, constant >= 0, valid_from >= 0")

    def bound(self, t):
        return self.constant * np.exp(-self.rate * np.asarray(t, dtype=float))

    @classmethod
    def certify(cls, f, rate, constant, valid_from=1.0, horizon=60.0, points=400) -> DecayCertificate:
        """Build a certificate after checking it against ``f`` on a grid."""
        cert = cls(rate, constant, valid_from)
        grid = valid_from + np.linspace(0.0, horizon / rate, points)
        for t in grid:
            v = abs(f(t))
            if v > cert.bound(t) * (1 + 1e-12) + 1e-300:
                raise ValueError(f"decay bound violated at t={t:.6g}: |f|={v:.3e} > {cert.bound(t):.3e}")
        return cert


@dataclass(frozen=True)
class MellinData:
    """A function packaged with what is needed to continue its Mellin transform.

    ``remainder`` evaluates ``f - expansion`` directly; supplying it avoids
    the cancellation of subtracting two nearly equal numbers near t = 0.
    """

    f: Callable[[float], float]
    expansion: AsymptoticExpansion
    decay: DecayCertificate | None
    remainder: Callable[[float], float] | None = None

    def rem(self, t: float) -> float:
        if self.remainder is not None:
            return self.remainder(t)
        return self.f(t) - self.expansion(t)

    def __add__(self, other: MellinData) -> MellinData:
        return combine([(1.0, self), (1.0, other)])

    def scaled(self, c: float) -> MellinData:
        return combine([(c, self)])


def combine(weighted: list) -> MellinData:
    """Linear combination ``sum w_i data_i`` of Mellin data."""
    weighted = [(float(w), d) for w, d in weighted if w != 0]
    if not weighted:
        return MellinData(lambda t: 0.0, AsymptoticExpansion(), DecayCertificate(1.0, 0.0))
    exp = AsymptoticExpansion()
    for w, d in weighted:
        exp = exp + d.expansion.scaled(w)
    exp = AsymptoticExpansion(tuple(x for x in exp.terms if x[2] != 0.0), exp.remainder_exponent)
    if any(d.decay is None for _, d in weighted):
        decay = None
    else:
        rate = min(d.decay.rate for _, d in weighted)
        start = max(d.decay.valid_from for _, d in weighted)
        const = sum(abs(w) * d.decay.constant * math.exp(-(d.decay.rate - rate) * start) for w, d in weighted)
        decay = DecayCertificate(rate, const, start)
    return MellinData(
        f=lambda t: sum(w * d.f(t) for w, d in weighted),
        expansion=exp,
        decay=decay,
        remainder=lambda t: sum(w * d.rem(t) for w, d in weighted),
    )


@dataclass
class LaurentSeries:
    """Truncated Laurent series ``sum_m coeffs[m] s^m`` about ``anchor``.

    Coefficients above ``order_max`` are unknown and are never produced.
    """

    coeffs: dict = field(default_factory=dict)
    order_max: int = LAURENT_ORDER
    anchor: complex = 0.0

    def __post_init__(self):
        self.coeffs = {int(m): complex(c) for m, c in self.coeffs.items() if m <= self.order_max}

    def __getitem__(self, m: int) -> complex:
        return self.coeffs.get(m, 0j)

    @property
    def low(self) -> int:
        nz = [m for m, c in self.coeffs.items() if c != 0]
        return min(nz) if nz else 0

    def pole_order(self, tol: float = 0.0) -> int:
        scale = max((abs(c) for c in self.coeffs.values()), default=0.0)
        neg = [m for m, c in self.coeffs.items() if m < 0 and abs(c) > tol * max(scale, 1.0)]
        return -min(neg) if neg else 0

    def __add__(self, other: LaurentSeries) -> LaurentSeries:
        om = min(self.order_max, other.order_max)
        keys = set(self.coeffs) | set(other.coeffs)
        return LaurentSeries({m: self[m] + other[m] for m in keys if m <= om}, om)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def __mul__(self, other: LaurentSeries) -> LaurentSeries:
        om = min(self.order_max + other.low, other.order_max + self.low)
        out: dict = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                if a + b <= om:
                    out[a + b] = out.get(a + b, 0j) + ca * cb
        return LaurentSeries(out, om)

    def scaled(self, c) -> LaurentSeries:
        return LaurentSeries({m: c * v for m, v in self.coeffs.items()}, self.order_max)

    def shift(self, k: int) -> LaurentSeries:
        """Multiply by ``s^k``."""
        return LaurentSeries({m + k: v for m, v in self.coeffs.items()}, self.order_max + k)

    def __call__(self, s: complex) -> complex:
        return sum(c * s**m for m, c in self.coeffs.items())


# -- special functions ----------------------------------------------------------

@cache
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2 (Akiyama-Tanigawa)."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    b = a[0]
    return -b if n == 1 else b


_EM_TERMS = 14
_EM_SHIFT = 4


def hurwitz_zeta(s, a: float):
    """Hurwitz zeta ``sum_{k>=0} (k+a)^-s`` by Euler-Maclaurin summation, any s != 1."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    if s == 1:
        raise PoleAtOne("Hurwitz zeta has a pole at s = 1")
    s = complex(s)
    # a small shift keeps the head sum, of size n^(1-s), from cancelling badly
    # when Re s < 0; the correction series still converges fast for n >= 4
    n = _EM_SHIFT + max(0, math.ceil(s.real / 2)) + int(abs(s.imag))
    total = sum((k + a) ** -s for k in range(n))
    x = n + a
    total += x ** (1 - s) / (s - 1) + 0.5 * x**-s
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, _EM_TERMS + 1):
        total += float(bernoulli(2 * j)) / math.factorial(2 * j) * rising * x ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return total.real if s.imag == 0 else total


def hurwitz_zeta_prime0(a: float) -> float:
    """d/ds zeta_H(s, a) at s = 0, by Lerch's formula log Gamma(a) - log(2 pi)/2."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    return math.lgamma(a) - 0.5 * math.log(2 * math.pi)


def _series_exp(g: list) -> list:
    # exp of a power series with g[0] = 0
    n = len(g)
    e = [0.0] * n
    e[0] = 1.0
    for m in range(1, n):
        e[m] = sum(k * g[k] * e[m - k] for k in range(1, m + 1)) / m
    return e


def _log_gamma1p_coeffs(order: int) -> list:
    # log Gamma(1+s) = -gamma s + sum_{k>=2} (-1)^k zeta(k) s^k / k
    g = [0.0] * (order + 1)
    if order >= 1:
        g[1] = -EULER_GAMMA
    for k in range(2, order + 1):
        g[k] = (-1) ** k * hurwitz_zeta(k, 1.0) / k
    return g


def reciprocal_gamma_series(order: int = LAURENT_ORDER) -> LaurentSeries:
    """Taylor series of 1/Gamma(s) at 0 through ``s^order``: s + gamma s^2 + ..."""
    if order < 1:
        raise ValueError("order must be >= 1")
    e = _series_exp([-c for c in _log_gamma1p_coeffs(order - 1)])
    return LaurentSeries({k + 1: e[k] for k in range(order)}, order)


def gamma_series(order: int = LAURENT_ORDER) -> LaurentSeries:
    """Laurent series of Gamma(s) at 0 through ``s^order``: 1/s - gamma + ..."""
    e = _series_exp(_log_gamma1p_coeffs(order + 1))
    return LaurentSeries({k - 1: e[k] for k in range(order + 2)}, order)


def recip_s_gamma_series(order: int = LAURENT_ORDER) -> LaurentSeries:
    """Taylor series of 1/(s Gamma(s)) = 1/Gamma(1+s), holomorphic with value 1 at 0."""
    return reciprocal_gamma_series(order + 1).shift(-1)


def finite_part(F: LaurentSeries, divide_by_s: bool = False, multiply_recip_gamma: bool = False):
    """Order-zero coefficient of ``F`` after the requested factors.

    ``divide_by_s`` applies ``1/s``; ``multiply_recip_gamma`` applies the
    factor ``1/(s Gamma(s))``, which is holomorphic at 0 with value 1.
    """
    if F.pole_order() > 2:
        raise PoleTooDeep(f"pole of order {F.pole_order()} at s = 0")
    G = F
    if divide_by_s:
        G = G.shift(-1)
    if multiply_recip_gamma:
        G = G * recip_s_gamma_series(max(G.order_max - G.low, 1) + 1)
    v = G[0]
    return v.real if abs(v.imag) <= 1e-14 * max(1.0, abs(v)) else v


# -- closed-form terms -----------------------------------------------------------

def mellin_term_closed(alpha: float, j: int, T: float, s) -> complex:
    """Continued value of ``int_0^T t^(s+alpha-1) (log t)^j dt``.

    At ``s + alpha = 0`` the integral has a pole; the finite part
    ``(log T)^(j+1)/(j+1)`` is returned there.
    """
    if not T > 0:
        raise NonpositiveT("split point T must be positive")
    sigma = complex(s) + alpha
    logT = math.log(T)
    if sigma == 0:
        return complex(logT ** (j + 1) / (j + 1))
    Ts = cmath.exp(sigma * logT)
    val = Ts / sigma
    for i in range(1, j + 1):
        val = (Ts * logT**i - i * val) / sigma
    return val


def mellin_term_laurent(alpha: float, j: int, T: float, order: int = LAURENT_ORDER) -> LaurentSeries:
    """Laurent series at s = 0 of the continued ``int_0^T t^(s+alpha-1) (log t)^j dt``."""
    if not T > 0:
        raise NonpositiveT("split point T must be positive")
    if alpha != 0:
        # d/ds raises the log power by one
        return LaurentSeries(
            {k: mellin_term_closed(alpha, j + k, T, 0.0) / math.factorial(k) for k in range(order + 1)}, order
        )
    logT = math.log(T)
    # T^s * sum_i C(j,i) (log T)^(j-i) (-1)^i i! s^-(i+1)
    polar = LaurentSeries(
        {-(i + 1): math.comb(j, i) * logT ** (j - i) * (-1) ** i * math.factorial(i) for i in range(j + 1)},
        order + j + 1,
    )
    ts = LaurentSeries({m: logT**m / math.factorial(m) for m in range(order + j + 2)}, order + j + 1)
    out = polar * ts
    return LaurentSeries({m: c for m, c in out.coeffs.items() if m <= order}, order)


# -- quadrature -------------------------------------------------------------------

def _quad_real(fun, a, b, tol, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fun, a, b, epsabs=tol * 1e-2, epsrel=1e-13, limit=400, points=points)
    # the target is absolute for O(1) integrals and relative for large ones
    if not np.isfinite(val) or err > tol * max(1.0, abs(val)):
        raise QuadratureFailure(f"quadrature on [{a:.4g}, {b:.4g}] reached error {err:.2e} > {tol:.1e}")
    return val, err


def _quad(fun, a, b, tol=QUAD_TOL, is_complex=False):
    if not is_complex:
        return _quad_real(lambda t: fun(t).real, a, b, tol)[0]
    re = _quad_real(lambda t: fun(t).real, a, b, tol)[0]
    im = _quad_real(lambda t: fun(t).imag, a, b, tol)[0]
    return complex(re, im)


def _tail_end(decay: DecayCertificate, T: float, power: float, eps: float = 1e-17) -> float:
    # smallest x with C * int_x^inf e^(-rate t) t^power dt < eps, using
    # int_x^inf e^(-l t) t^a dt <= e^(-l x) x^a / (l - a/x) for x > a/l
    lam, C = decay.rate, decay.constant
    if C == 0:
        return T
    a = max(power, 0.0)
    x = max(T, decay.valid_from, 2 * a / lam + 1.0)
    step = 1.0 / lam
    while C * math.exp(-lam * x + a * math.log(x)) / (lam - a / x) > eps:
        x += step
        step *= 1.25
    return x


def tail_integral(f, decay: DecayCertificate | None, T: float, weight, weight_power: float,
                  tol=QUAD_TOL, is_complex=False):
    """``int_T^inf f(t) weight(t) dt`` with ``|weight(t)| <= t^weight_power`` for t >= 1."""
    if decay is None:
        raise DivergentTail("no decay certificate: the integral over [T, inf) is not controlled")
    if T < decay.valid_from:
        head = _quad(lambda t: f(t) * weight(t), T, decay.valid_from, tol, is_complex)
        return head + tail_integral(f, decay, decay.valid_from, weight, weight_power, tol, is_complex)
    end = _tail_end(decay, T, weight_power)
    if end <= T:
        return 0.0
    # pieces a few decay lengths wide keep QUADPACK's bisection efficient
    width = max(4.0 / decay.rate, 1.0)
    edges = np.append(np.arange(T, end, width), end)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            total += _quad(lambda t: f(t) * weight(t), lo, hi, tol, is_complex)
    return total


def _check_remainder(expansion: AsymptoticExpansion, s: complex):
    if not complex(s).real + expansion.remainder_exponent > 0:
        raise QuadratureFailure(
            f"remainder O(t^{expansion.remainder_exponent}) is not integrable against t^(s-1) at Re s = {complex(s).real}"
        )


def continue_mellin(f, expansion: AsymptoticExpansion, decay: DecayCertificate | None, T: float, s,
                    remainder=None, tol: float = QUAD_TOL) -> complex:
    """Continued Mellin transform ``int_0^inf f(t) t^(s-1) dt`` at ``s``."""
    if not T > 0:
        raise NonpositiveT("split point T must be positive")
    if decay is None:
        raise DivergentTail("no decay certificate: the integral over [T, inf) is not controlled")
    s = complex(s)
    _check_remainder(expansion, s)
    rem = remainder if remainder is not None else (lambda t: f(t) - expansion(t))
    cplx = s.imag != 0
    sm1 = s - 1

    def w(t):
        return cmath.exp(sm1 * math.log(t)) if cplx else complex(t ** sm1.real)

    head = sum(c * mellin_term_closed(a, j, T, s) for a, j, c in expansion.terms)
    t1 = min(T, 1.0)
    mid = _quad(lambda t: rem(t) * w(t), 0.0, t1, tol, cplx)
    if T > t1:
        mid += _quad(lambda t: rem(t) * w(t), t1, T, tol, cplx)
    tail = tail_integral(f, decay, T, w, max(sm1.real, 0.0), tol, cplx)
    return complex(head) + mid + tail


def mellin(data: MellinData, s, T: float = 1.0, tol: float = QUAD_TOL) -> complex:
    return continue_mellin(data.f, data.expansion, data.decay, T, s, data.remainder, tol)


def mellin_laurent(data: MellinData, T: float = 1.0, order: int = LAURENT_ORDER,
                   tol: float = QUAD_TOL) -> LaurentSeries:
    """Laurent coefficients at s = 0 of the continued Mellin transform of ``data.f``.

    The numeric pieces are holomorphic at 0; their k-th Taylor coefficient is
    the integral against ``t^-1 (log t)^k / k!``.
    """
    if not T > 0:
        raise NonpositiveT("split point T must be positive")
    _check_remainder(data.expansion, 0.0)
    out = LaurentSeries({}, order)
    for a, j, c in data.expansion.terms:
        out = out + mellin_term_laurent(a, j, T, order).scaled(c)
    t1 = min(T, 1.0)
    numeric = {}
    for k in range(order + 1):
        kf = math.factorial(k)

        def w(t, k=k, kf=kf):
            return math.log(t) ** k / (kf * t)

        val = _quad(lambda t: data.rem(t) * w(t), 0.0, t1, tol)
        if T > t1:
            val += _quad(lambda t: data.rem(t) * w(t), t1, T, tol)
        val += tail_integral(data.f, data.decay, T, w, float(k), tol)
        numeric[k] = val
    return out + LaurentSeries(numeric, order)


def head_laurent(expansion: AsymptoticExpansion, T: float = 1.0, order: int = LAURENT_ORDER) -> LaurentSeries:
    """Laurent series at 0 of the closed-form part alone; it carries every pole at 0."""
    out = LaurentSeries({}, order)
    for a, j, c in expansion.terms:
        out = out + mellin_term_laurent(a, j, T, order).scaled(c)
    return out


# -- stable Taylor remainders -------------------------------------------------------

def exp_taylor_remainder(x, K: int):
    """``exp(-x) - sum_{k<K} (-x)^k / k!`` without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 2.0
    if np.any(small):
        xs = x[small]
        term = (-xs) ** K / math.factorial(K)
        acc = term.copy()
        for k in range(K + 1, K + 40):
            term = term * (-xs) / k
            acc += term
        out[small] = acc
    if np.any(~small):
        xl = x[~small]
        poly = np.zeros_like(xl)
        for k in range(K):
            poly += (-xl) ** k / math.factorial(k)
        out[~small] = np.exp(-xl) - poly
    return out if out.ndim else float(out)


def exponential_sum_data(rates, weights, taylor_terms: int = 6, power: float = 0.0) -> MellinData:
    """Mellin data for ``t^power * sum_i w_i exp(-rate_i t)`` with all ``rate_i > 0``.

    The small-t expansion is the Taylor series to ``taylor_terms`` terms.
    """
    rates = np.asarray(rates, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if rates.size == 0:
        return combine([])
    if np.any(rates <= 0):
        raise ValueError("exponential rates must be positive")
    terms = []
    for k in range(taylor_terms):
        c = float(np.sum(weights * (-rates) ** k)) / math.factorial(k)
        if c != 0.0:
            terms.append((power + k, 0, c))
    expansion = AsymptoticExpansion(tuple(terms), power + taylor_terms)

    def f(t):
        return float(t**power * np.sum(weights * np.exp(-rates * t)))

    def rem(t):
        return float(t**power * np.sum(weights * exp_taylor_remainder(rates * t, taylor_terms)))

    gap = float(rates.min())
    # for t >= 1: |w| e^(-r t) <= |w| e^(-(r - gap)) e^(-gap t)
    c1 = float(np.sum(np.abs(weights) * np.exp(-(rates - gap))))
    if power <= 0:
        decay = DecayCertificate(gap, c1)
    else:
        # trade half the gap for the polynomial factor: sup t^p e^(-gap t/2)
        decay = DecayCertificate(gap / 2, c1 * (2 * power / (math.e * gap)) ** power)
    return MellinData(f=f, expansion=expansion, decay=decay, remainder=rem)
