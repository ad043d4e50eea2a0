"""Reference computations that share no code with the package."""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np

EULER_GAMMA = 0.57721566490153286061


def exp_integral_e1(x: float) -> float:
    """E1(x) = int_x^inf e^-u / u du: power series below 1, Lentz continued fraction above."""
    if x <= 0:
        raise ValueError("x must be positive")
    if x <= 1.0:
        total, term, k = 0.0, 1.0, 1
        while True:
            term *= -x / k
            add = -term / k
            total += add
            if abs(add) < 1e-18:
                break
            k += 1
        return -EULER_GAMMA - math.log(x) + total
    # E1(x) = e^-x / (x + 1 / (1 + 1 / (x + 2 / (1 + 2 / (x + ...)))))
    # evaluated as the equivalent even contraction with modified Lentz
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        a = -i * i
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x)


def sl_count_enumerated(n: int, N: int) -> int:
    """Number of n x n matrices over Z/N with determinant 1, by enumeration.

    For n = 3 the first two rows are enumerated and the third row is counted
    against their cross product, which visits every matrix exactly once.
    """
    vals = np.arange(N)
    if n == 2:
        a, b, c, d = np.meshgrid(vals, vals, vals, vals, indexing="ij")
        return int(np.count_nonzero((a * d - b * c) % N == 1))
    if n == 3:
        rows = np.array(list(itertools.product(range(N), repeat=3)), dtype=np.int64)
        total = 0
        for r1 in rows:
            cross = np.cross(r1, rows)  # cofactor vectors for every second row
            total += int(np.count_nonzero((cross @ rows.T) % N == 1))
        return total
    raise ValueError("only n = 2, 3 supported")


def charpoly_shifted_sympy(rows) -> list:
    """Coefficients [a_0, ..., a_{n-1}] of det(x I - (gamma - I)) via sympy."""
    import sympy

    m = sympy.Matrix(rows) - sympy.eye(len(rows))
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(m.charpoly(x).as_expr(), x).all_coeffs()[::-1]
    return [sympy.Rational(c) for c in coeffs[:-1]]


def padic_valuation(q, p: int):
    """Valuation of a rational by repeated division."""
    from fractions import Fraction

    q = Fraction(q)
    if q == 0:
        return math.inf
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def circle_dirichlet(L: float, alpha: float, s: complex, K: int = 200_000) -> complex:
    """sum over k in Z of (2 pi |k + alpha| / L)^(-2s), zero modes skipped, plus an integral tail estimate."""
    k = np.arange(-K, K + 1, dtype=float) + alpha
    k = np.abs(k[k != 0])
    lam = (2 * math.pi * k / L) ** 2
    head = complex(np.sum(np.exp(-s * np.log(lam))))
    # Euler-Maclaurin tail of both one-sided families beyond |k| = K
    c = (2 * math.pi / L) ** (-2 * s)
    tail = 0j
    for u in (K + 1 + alpha, K + 1 - alpha):
        tail += c * (u ** (1 - 2 * s) / (2 * s - 1) + 0.5 * u ** (-2 * s))
    return head + tail


def torus2_zeta(L1: float, L2: float, a1: float, a2: float, s) -> complex:
    """sum over k in Z^2 of (A^2 (k1+a1)^2 + B^2 (k2+a2)^2)^-s, A = 2 pi/L1, B = 2 pi/L2, 0 < a1 < 1.

    Chowla-Selberg splitting: summing over k2 first with m = A |k1 + a1| / B,

        sum_k2 (m^2 + (k2+a2)^2)^-s = sqrt(pi) G(s-1/2)/G(s) m^(1-2s)
            + 4 pi^s / G(s) sum_n cos(2 pi n a2) (n/m)^(s-1/2) K_(s-1/2)(2 pi n m),

    and the first term summed over k1 is a pair of Hurwitz zeta values.  Valid
    for every s away from the poles, so it also checks the continuation.
    """
    mp = mpmath
    # s = 1/2 is a removable 0 * inf point of this formula; callers avoid it
    with mp.workdps(30):
        s = mp.mpmathify(s)
        A, B = 2 * mp.pi / L1, 2 * mp.pi / L2
        a1, a2 = mp.mpf(a1), mp.mpf(a2)
        lead = mp.sqrt(mp.pi) * mp.gamma(s - 0.5) / mp.gamma(s) * (A / B) ** (1 - 2 * s)
        lead *= mp.zeta(2 * s - 1, a1) + mp.zeta(2 * s - 1, 1 - a1)
        bessel = mp.mpf(0)
        kmax = int(12 * float(B / A)) + 3
        for k in range(-kmax, kmax + 1):
            m = A * abs(k + a1) / B
            nmax = int(20 / float(m)) + 2
            for n in range(1, nmax + 1):
                bessel += mp.cos(2 * mp.pi * n * a2) * (n / m) ** (s - 0.5) * mp.besselk(s - 0.5, 2 * mp.pi * n * m)
        bessel *= 4 * mp.pi**s / mp.gamma(s)
        return complex(B ** (-2 * s) * (lead + bessel))

