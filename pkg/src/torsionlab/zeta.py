"""Spectral zeta functions of model spectra.

zeta(s) = sum m lambda^-s over positive eigenvalues, continued to all s as

    zeta(s) = 1/Gamma(s) int_0^inf (theta(t) - kernel_dim) t^(s-1) dt.

Two independent routes are provided: the Mellin continuation, valid for
every s, and the plain Dirichlet sum with a rigorous tail bound, valid only
where the series converges.  Model spectra are evaluated untruncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from .errors import BudgetExceeded, InputError, PoleAtZero, ZetaPole
from .mellin import QUAD_TOL, finite_part, mellin, mellin_laurent
from .spectra import (
    ExplicitPart,
    Spectrum,
    TorusPart,
    natural_split,
    zeta_mellin_data,
)

DIRECT_TOL = 1e-10
MAX_TERMS = 20_000_000
FD_STEP = 1e-4


def _is_trivial(spec: Spectrum) -> bool:
    return not spec.parts or all(e == 0 for e, _ in spec.entries) and all(isinstance(p, ExplicitPart) for p in spec.parts)


def _as_output(v: complex, s: complex):
    return float(v.real) if complex(s).imag == 0 else complex(v)


# -- direct Dirichlet sums ---------------------------------------------------------

@dataclass(frozen=True)
class DirichletSum:
    value: complex
    tail_bound: float
    K: int | None


def _torus_tail_bound(part: TorusPart, sigma: float, K: int) -> float:
    # lambda >= c_min^2 |k + alpha|_inf^2; the shell max|k_i| = j has at most
    # 2d (2j+1)^(d-1) points, all with |k + alpha|_inf > j - 1 >= (2j+1)/3.
    d = part.d
    if 2 * sigma <= d:
        return math.inf
    c_min = min(2 * math.pi / L for L in part.lengths)
    if part.d == 1:
        # two one-sided families starting at u = K+1 +- alpha
        a = part.alphas[0]
        total = 0.0
        for u in (K + 1 + a, K + 1 - a):
            total += u ** (-2 * sigma) + u ** (1 - 2 * sigma) / (2 * sigma - 1)
        return part.weight * c_min ** (-2 * sigma) * total
    if K < 3:
        return math.inf
    return part.weight * c_min ** (-2 * sigma) * 2 * d * 3 ** (d - 1) * (
        K ** (d - 1 - 2 * sigma) + K ** (d - 2 * sigma) / (2 * sigma - d)
    )


def _torus_partial(part: TorusPart, s: complex, K: int) -> complex:
    ev = TorusPart(part.weight, part.lengths, part.alphas, K).eigenvalues()
    ev = ev[ev > 0]
    terms = np.exp(-s * np.log(ev)) if complex(s).imag else ev ** (-complex(s).real)
    return part.weight * complex(np.sum(terms))


def dirichlet_sum(spec: Spectrum, s, tol: float = DIRECT_TOL, max_terms: int = MAX_TERMS) -> DirichletSum:
    """sum m lambda^-s over the untruncated model, with a bound on the omitted tail."""
    s = complex(s)
    sigma = s.real
    if not sigma > spec.dim / 2:
        raise InputError(f"the Dirichlet series needs Re s > {spec.dim / 2}")
    total = 0j
    bound = 0.0
    K_used = None
    for p in spec.parts:
        if isinstance(p, ExplicitPart):
            lam, m = p.eigenvalues_and_mult()
            keep = lam > 0
            total += complex(np.sum(m[keep] * np.exp(-s * np.log(lam[keep]))))
            continue
        K = 8
        while _torus_tail_bound(p, sigma, K) > tol and (2 * K + 1) ** p.d <= max_terms:
            K *= 2
        if (2 * K + 1) ** p.d > max_terms:
            K //= 2
        b = _torus_tail_bound(p, sigma, K)
        total += _torus_partial(p, s, K)
        bound += b
        K_used = K if K_used is None else min(K_used, K)
    return DirichletSum(total, bound, K_used)


# -- continued zeta ------------------------------------------------------------------

def _nonpositive_integer(s: complex) -> int | None:
    if s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real):
        return int(-s.real)
    return None


def zeta_from_spectrum(spec: Spectrum, s, method: str = "mellin", T: float | None = None,
                       tol: float = DIRECT_TOL):
    """Spectral zeta function of the untruncated model at ``s``.

    ``method="direct"`` sums the Dirichlet series (Re s > dim/2) and raises
    BudgetExceeded if the tail cannot be pushed below ``tol``;
    ``method="mellin"`` (the default) uses the continued Mellin transform.
    """
    s = complex(s)
    if method not in ("mellin", "direct", "auto"):
        raise InputError(f"unknown method {method!r}")
    if _is_trivial(spec):
        return _as_output(0j, s)
    if method == "direct" or (method == "auto" and s.real > spec.dim / 2 + 1):
        res = dirichlet_sum(spec, s, tol)
        if res.tail_bound > tol:
            raise BudgetExceeded(f"Dirichlet tail bound {res.tail_bound:.2e} exceeds {tol:.1e}")
        return _as_output(res.value, s)
    taylor = max(6, math.ceil(-s.real) + 2)
    data = zeta_mellin_data(spec, taylor_terms=taylor)
    k = _nonpositive_integer(s)
    exps = data.expansion.terms
    if k is not None:
        if any(a == k and j > 0 and c != 0 for a, j, c in exps):
            raise ZetaPole(f"log terms at t^{k} give zeta a pole at s = {-k}")
        # 1/Gamma has a simple zero at -k with derivative (-1)^k k!, which
        # picks out the residue of the Mellin transform there
        res = sum(c for a, j, c in exps if a == k and j == 0)
        return _as_output(complex((-1) ** k * math.factorial(k) * res), s)
    if any(s + a == 0 and c != 0 for a, _, c in exps):
        raise ZetaPole(f"zeta has a pole at s = {s}")
    split = natural_split(spec) if T is None else T
    return _as_output(mellin(data, s, split) * rgamma(s), s)


def _check_regular_at_zero(spec: Spectrum):
    data = zeta_mellin_data(spec)
    if any(a == 0 and j > 0 and c != 0 for a, j, c in data.expansion.terms):
        raise PoleAtZero("a t^0 log t term gives zeta a pole at s = 0")
    return data


def zeta_prime_zero(spec: Spectrum, h: float = FD_STEP, T: float | None = None) -> float:
    """zeta'(0) by central differences with one Richardson step.

    The 1/Gamma(s) factor is O(h) at s = +-h, which damps quadrature noise in
    the Mellin transform by the same factor.
    """
    if _is_trivial(spec):
        return 0.0
    _check_regular_at_zero(spec)
    split = natural_split(spec) if T is None else T

    def diff(step):
        return (zeta_from_spectrum(spec, step, T=split) - zeta_from_spectrum(spec, -step, T=split)) / (2 * step)

    return (4 * diff(h / 2) - diff(h)) / 3


def zeta_prime_zero_laurent(spec: Spectrum, T: float | None = None, order: int = 2) -> float:
    """zeta'(0) as the finite part at 0 of M(s) / (s Gamma(s)), with M the Mellin transform."""
    if _is_trivial(spec):
        return 0.0
    data = _check_regular_at_zero(spec)
    split = natural_split(spec) if T is None else T
    F = mellin_laurent(data, split, order, QUAD_TOL)
    return finite_part(F, multiply_recip_gamma=True)
