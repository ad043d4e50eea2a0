"""Model spectra of flat Laplacians and their heat traces.

A twisted circle of length L with twist alpha has eigenvalues
(2 pi (k + alpha) / L)^2, k in Z.  A flat torus is a product of circles, and
its p-form Laplacian is the function Laplacian with multiplicity C(d, p).
Besides the truncated eigenvalue list, every spectrum keeps the closed-form
model it came from, so heat traces of the untruncated operator, rigorous tail
bounds and small-t expansions are all available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import HasKernel, InputError, NonpositiveTime, UnsupportedModel
from .mellin import (
    AsymptoticExpansion,
    DecayCertificate,
    MellinData,
    combine,
    exponential_sum_data,
)

MERGE_RTOL = 1e-13
TAIL_TOL = 1e-13
_LOG_TINY = 41.5  # e^-41.5 < 1e-18


# -- single circle ----------------------------------------------------------------

def _check_time(t):
    if not t > 0:
        raise NonpositiveTime(f"time must be positive, got {t!r}")


def circle_eigenvalues(L: float, alpha: float, K: int) -> np.ndarray:
    k = np.arange(-K, K + 1, dtype=float)
    return (2 * np.pi * (k + alpha) / L) ** 2


def crossover_time(L: float) -> float:
    """Time at which the direct sum and the Poisson dual converge equally fast."""
    return L * L / (4 * np.pi)


def circle_tail_bound(L: float, alpha: float, K: int, t: float) -> float:
    """Rigorous bound on ``sum_{|k| > K} exp(-t (2 pi (k + alpha)/L)^2)``.

    The omitted modes split into k >= K+1, where |k + alpha| >= K+1+alpha, and
    k <= -K-1, where |k + alpha| >= K+1-alpha.  For each family
    sum_{j>=0} exp(-a (u+j)^2) <= exp(-a u^2) / (1 - exp(-2 a u)) since
    (u+j)^2 >= u^2 + 2uj.
    """
    _check_time(t)
    a = t * (2 * np.pi / L) ** 2
    total = 0.0
    for u in (K + 1 + alpha, K + 1 - alpha):
        total += math.exp(-a * u * u) / -math.expm1(-2 * a * u)
    return total


def circle_cutoff(L: float, alpha: float, t_min: float, tol: float = TAIL_TOL) -> int:
    """Smallest K whose circle tail bound at ``t_min`` is below ``tol``."""
    K = 0
    while circle_tail_bound(L, alpha, K, t_min) >= tol:
        K = 2 * K + 1 if circle_tail_bound(L, alpha, 2 * K + 1, t_min) >= tol else K + 1
    return K


def _poisson_terms(L: float, alpha: float, t: float) -> float:
    # rho = 2 sum_{m>=1} exp(-L^2 m^2 / 4t) cos(2 pi m alpha)
    M = int(math.ceil(math.sqrt(4 * t * _LOG_TINY) / L)) + 1
    m = np.arange(1, M + 1, dtype=float)
    return float(2 * np.sum(np.exp(-L * L * m * m / (4 * t)) * np.cos(2 * np.pi * m * alpha)))


def heat_trace_poisson_circle(L: float, alpha: float, t: float) -> float:
    """Theta-transformed circle trace (L / sqrt(4 pi t)) sum_m exp(-L^2 m^2/4t) cos(2 pi m alpha)."""
    _check_time(t)
    return L / math.sqrt(4 * math.pi * t) * (1.0 + _poisson_terms(L, alpha, t))


def _circle_direct(L: float, alpha: float, t: float, skip_zero: bool) -> float:
    a = t * (2 * np.pi / L) ** 2
    M = int(math.ceil(math.sqrt(_LOG_TINY / a))) + 2
    k = np.arange(-M, M + 1, dtype=float) + alpha
    terms = np.exp(-a * k * k)
    if skip_zero:
        terms[M] = 0.0
    return float(np.sum(np.sort(terms)))


def circle_theta(L: float, alpha: float, t: float) -> float:
    """Full (untruncated) trace sum_k exp(-t (2 pi (k + alpha)/L)^2)."""
    _check_time(t)
    if t < crossover_time(L):
        return heat_trace_poisson_circle(L, alpha, t)
    return _circle_direct(L, alpha, t, False)


def _circle_theta_minus_kernel(L: float, alpha: float, t: float) -> float:
    if t < crossover_time(L) or alpha != 0:
        return circle_theta(L, alpha, t) - (1.0 if alpha == 0 else 0.0)
    return _circle_direct(L, alpha, t, True)


# -- model parts -----------------------------------------------------------------------

@dataclass(frozen=True)
class TorusPart:
    """``weight`` copies of the Laplacian on a twisted flat torus, truncated at |k_i| <= K."""

    weight: int
    lengths: tuple
    alphas: tuple
    K: int

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        alphas = tuple(float(a) for a in self.alphas)
        if len(lengths) != len(alphas) or not lengths:
            raise InputError("lengths and alphas must be non-empty and of equal length")
        if any(not x > 0 for x in lengths):
            raise InputError("lengths must be positive")
        if any(not 0 <= a < 1 for a in alphas):
            raise InputError("twists must lie in [0, 1)")
        if self.weight < 1 or self.K < 0:
            raise InputError("weight must be >= 1 and K >= 0")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "alphas", alphas)

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def kernel(self) -> int:
        return self.weight if all(a == 0 for a in self.alphas) else 0

    @property
    def gap(self) -> float:
        """Smallest positive eigenvalue of the untruncated operator."""
        lows = [(2 * math.pi * min(a, 1 - a) / L) ** 2 for L, a in zip(self.lengths, self.alphas)]
        base = sum(lows)
        if base > 0:
            return base
        return min((2 * math.pi / L) ** 2 for L in self.lengths)

    def eigenvalues(self) -> np.ndarray:
        grids = [circle_eigenvalues(L, a, self.K) for L, a in zip(self.lengths, self.alphas)]
        total = grids[0]
        for g in grids[1:]:
            total = (total[:, None] + g[None, :]).ravel()
        return total

    def truncated_trace(self, t: float) -> float:
        out = 1.0
        for L, a in zip(self.lengths, self.alphas):
            out *= float(np.sum(np.exp(-t * circle_eigenvalues(L, a, self.K))))
        return self.weight * out

    def tail_bound(self, t: float) -> float:
        trunc = [float(np.sum(np.exp(-t * circle_eigenvalues(L, a, self.K)))) for L, a in zip(self.lengths, self.alphas)]
        tails = [circle_tail_bound(L, a, self.K, t) for L, a in zip(self.lengths, self.alphas)]
        # prod(theta_K + b) - prod(theta_K), expanded so no cancellation occurs
        extra = 0.0
        for mask in product((0, 1), repeat=self.d):
            if any(mask):
                extra += math.prod(tails[i] if m else trunc[i] for i, m in enumerate(mask))
        return self.weight * extra

    def theta(self, t: float) -> float:
        return self.weight * math.prod(circle_theta(L, a, t) for L, a in zip(self.lengths, self.alphas))

    def theta_minus_kernel(self, t: float) -> float:
        if not self.kernel:
            return self.theta(t)
        u = [_circle_theta_minus_kernel(L, a, t) for L, a in zip(self.lengths, self.alphas)]
        return self.weight * math.expm1(sum(math.log1p(x) for x in u))

    @property
    def leading_coefficient(self) -> float:
        return self.weight * math.prod(self.lengths) / (4 * math.pi) ** (self.d / 2)

    def remainder(self, t: float) -> float:
        """theta(t) - a0 t^(-d/2), which is exponentially small as t -> 0."""
        lead = self.leading_coefficient * t ** (-self.d / 2)
        if all(t < crossover_time(L) for L in self.lengths):
            rho = [_poisson_terms(L, a, t) for L, a in zip(self.lengths, self.alphas)]
            return lead * math.expm1(sum(math.log1p(r) for r in rho))
        return self.theta(t) - lead

    def to_json(self) -> dict:
        return {"model": "torus", "weight": self.weight, "lengths": list(self.lengths),
                "alphas": list(self.alphas), "K": self.K}


@dataclass(frozen=True)
class ExplicitPart:
    """A finite list of (eigenvalue, multiplicity) pairs with no closed form."""

    entries: tuple

    def eigenvalues_and_mult(self):
        lam = np.array([e for e, _ in self.entries], dtype=float)
        mult = np.array([m for _, m in self.entries], dtype=float)
        return lam, mult

    def to_json(self) -> dict:
        return {"model": "explicit", "entries": [[float(e), int(m)] for e, m in self.entries]}


def _part_from_json(obj: dict):
    try:
        if obj["model"] == "torus":
            return TorusPart(int(obj["weight"]), tuple(obj["lengths"]), tuple(obj["alphas"]), int(obj["K"]))
        if obj["model"] == "explicit":
            return ExplicitPart(tuple((float(e), int(m)) for e, m in obj["entries"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed spectrum part: {exc}") from exc
    raise InputError(f"unknown spectrum model {obj.get('model')!r}")


# -- spectrum ----------------------------------------------------------------------------

def _merge(values: np.ndarray, mults: np.ndarray) -> tuple:
    if values.size == 0:
        return ()
    order = np.argsort(values, kind="stable")
    values, mults = values[order], mults[order]
    out = []
    cur, cm = float(values[0]), int(mults[0])
    for v, m in zip(values[1:], mults[1:]):
        v = float(v)
        if v - cur <= MERGE_RTOL * max(abs(cur), abs(v)):
            cm += int(m)
        else:
            out.append((cur, cm))
            cur, cm = v, int(m)
    out.append((cur, cm))
    return tuple(out)


@dataclass(frozen=True)
class HeatValue:
    value: float
    tail_bound: float
    t: float

    @property
    def reliable(self) -> bool:
        """False when truncation could distort the value beyond 1e-10 relative."""
        return self.tail_bound <= 1e-10 * max(abs(self.value), 1.0)


@dataclass(frozen=True)
class Spectrum:
    """Truncated spectrum together with the model parts that generated it."""

    dim: int
    parts: tuple
    entries: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dimension must be >= 1")
        for part in self.parts:
            if isinstance(part, TorusPart) and part.d != self.dim:
                raise InputError("torus part dimension does not match the spectrum")
        vals, mults = [], []
        for part in self.parts:
            if isinstance(part, TorusPart):
                ev = part.eigenvalues()
                vals.append(ev)
                mults.append(np.full(ev.shape, part.weight, dtype=np.int64))
            else:
                lam, m = part.eigenvalues_and_mult()
                if np.any(lam < 0) or np.any(m < 1):
                    raise InputError("eigenvalues must be >= 0 and multiplicities >= 1")
                vals.append(lam)
                mults.append(m.astype(np.int64))
        if vals:
            merged = _merge(np.concatenate(vals), np.concatenate(mults))
        else:
            merged = ()
        object.__setattr__(self, "entries", merged)

    # -- metadata
    @property
    def kernel_dim(self) -> int:
        return self.entries[0][1] if self.entries and self.entries[0][0] == 0.0 else 0

    @property
    def gap(self) -> float | None:
        """Smallest strictly positive eigenvalue, None for a spectrum with no positive entries."""
        pos = [e for e, _ in self.entries if e > 0]
        return pos[0] if pos else None

    @property
    def is_model(self) -> bool:
        return all(isinstance(p, TorusPart) for p in self.parts)

    @property
    def cutoff(self) -> dict:
        if len(self.parts) == 1:
            p = self.parts[0]
            if isinstance(p, TorusPart):
                kind = "circle" if p.d == 1 else "torus"
                return {"kind": kind, "K": p.K, "tail_formula": "gaussian-two-family",
                        "params": {"parts": [p.to_json()]}}
            return {"kind": "explicit", "K": None, "tail_formula": "none", "params": {"parts": [p.to_json()]}}
        ks = [p.K for p in self.parts if isinstance(p, TorusPart)]
        return {"kind": "sum", "K": min(ks) if ks else None, "tail_formula": "gaussian-two-family",
                "params": {"parts": [p.to_json() for p in self.parts]}}

    @property
    def arrays(self):
        lam = np.array([e for e, _ in self.entries], dtype=float)
        mult = np.array([m for _, m in self.entries], dtype=float)
        return lam, mult

    @property
    def size(self) -> int:
        return sum(m for _, m in self.entries)

    # -- combinations
    def union(self, other: Spectrum) -> Spectrum:
        if other.dim != self.dim:
            raise InputError("cannot join spectra of different dimensions")
        return Spectrum(self.dim, self.parts + other.parts)

    def copies(self, k: int) -> Spectrum:
        """Disjoint union of ``k`` identical copies."""
        if k < 0:
            raise InputError("number of copies must be >= 0")
        parts = []
        for p in self.parts:
            if isinstance(p, TorusPart):
                parts.append(TorusPart(p.weight * k, p.lengths, p.alphas, p.K))
            else:
                parts.append(ExplicitPart(tuple((e, m * k) for e, m in p.entries)))
        return Spectrum(self.dim, tuple(parts) if k else ())

    def without_kernel(self) -> Spectrum:
        """Drop the zero eigenvalue; the result is a plain explicit spectrum."""
        return explicit_spectrum([(e, m) for e, m in self.entries if e > 0], self.dim)

    # -- io
    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "kernel_dim": self.kernel_dim,
            "entries": [[e, m] for e, m in self.entries],
            "cutoff": self.cutoff,
        }

    @classmethod
    def from_json(cls, obj: dict) -> Spectrum:
        try:
            dim = int(obj["dim"])
            cutoff = obj.get("cutoff") or {}
            parts_json = (cutoff.get("params") or {}).get("parts")
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"malformed spectrum: {exc}") from exc
        if parts_json:
            spec = cls(dim, tuple(_part_from_json(p) for p in parts_json))
        else:
            if "entries" not in obj:
                raise InputError("spectrum needs entries or model parts")
            spec = explicit_spectrum(obj["entries"], dim)
        if "kernel_dim" in obj and int(obj["kernel_dim"]) != spec.kernel_dim:
            raise InputError("kernel_dim does not match the entries")
        return spec


def circle_spectrum(L: float, alpha: float, K: int) -> Spectrum:
    return Spectrum(1, (TorusPart(1, (L,), (alpha,), int(K)),))


def torus_form_spectrum(lengths, alphas, p: int, K: int) -> Spectrum:
    d = len(lengths)
    if not 0 <= p <= d:
        raise InputError(f"form degree must lie in [0, {d}]")
    return Spectrum(d, (TorusPart(math.comb(d, p), tuple(lengths), tuple(alphas), int(K)),))


def explicit_spectrum(entries, dim: int = 1) -> Spectrum:
    try:
        pairs = tuple((float(e), int(m)) for e, m in entries)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed spectrum entries: {exc}") from exc
    return Spectrum(dim, (ExplicitPart(pairs),) if pairs else ())


def empty_spectrum(dim: int = 1) -> Spectrum:
    return Spectrum(dim, ())


# -- heat traces ---------------------------------------------------------------------------

def heat_trace(spec: Spectrum, t: float) -> HeatValue:
    """Trace of exp(-t Delta) over the stored entries, with a bound on what truncation dropped."""
    _check_time(t)
    lam, mult = spec.arrays
    value = float(np.sum(mult * np.exp(-lam * t))) if lam.size else 0.0
    bound = sum(p.tail_bound(t) for p in spec.parts if isinstance(p, TorusPart))
    return HeatValue(value=value, tail_bound=bound, t=t)


def model_heat_trace(spec: Spectrum, t: float) -> float:
    """Trace of the untruncated model operator; explicit parts contribute their finite sums."""
    _check_time(t)
    total = 0.0
    for p in spec.parts:
        if isinstance(p, TorusPart):
            total += p.theta(t)
        else:
            lam, m = p.eigenvalues_and_mult()
            total += float(np.sum(m * np.exp(-lam * t)))
    return total


@dataclass(frozen=True)
class EnvelopeReport:
    t: tuple
    margins: tuple
    constant: float
    gap: float
    passed: bool

    @property
    def min_margin(self) -> float:
        return min(self.margins) if self.margins else math.inf


def decay_envelope_check(spec: Spectrum, t_grid, tol: float = 1e-12) -> EnvelopeReport:
    """Check theta(t) <= theta(1) exp(-gap (t - 1)) on ``t_grid`` (all points >= 1).

    Margins are relative to theta(1), so ``tol`` is scale free.
    """
    if spec.kernel_dim > 0:
        raise HasKernel("the decay envelope needs a spectrum without zero modes")
    ts = tuple(float(t) for t in t_grid)
    if any(t < 1 for t in ts):
        raise InputError("the envelope is asserted only for t >= 1")
    gap = spec.gap
    if gap is None:
        return EnvelopeReport(ts, tuple(0.0 for _ in ts), 0.0, math.inf, True)
    c = heat_trace(spec, 1.0).value
    margins = tuple((c * math.exp(-gap * (t - 1)) - heat_trace(spec, t).value) / c for t in ts)
    return EnvelopeReport(ts, margins, c, gap, all(m >= -tol for m in margins))


def small_t_expansion(spec: Spectrum) -> AsymptoticExpansion:
    """Leading small-t term of the untruncated trace; the remainder is exponentially small."""
    if not spec.parts:
        return AsymptoticExpansion((), math.inf)
    if not spec.is_model:
        raise UnsupportedModel("raw eigenvalue lists have no closed-form small-t expansion")
    a0 = sum(p.leading_coefficient for p in spec.parts)
    return AsymptoticExpansion(((-spec.dim / 2, 0, a0),), math.inf)


# -- Mellin data for zeta functions ---------------------------------------------------------

TAYLOR_TERMS = 6


def _torus_mellin(part: TorusPart) -> MellinData:
    terms = [(-part.d / 2, 0, part.leading_coefficient)]
    if part.kernel:
        terms.append((0.0, 0, -float(part.kernel)))
    expansion = AsymptoticExpansion(tuple(terms), math.inf)
    gap = part.gap
    # each positive mode satisfies e^(-l t) <= e^(-l) e^(-gap (t-1)) for t >= 1
    decay = DecayCertificate(gap, part.theta_minus_kernel(1.0) * math.exp(gap), 1.0)
    return MellinData(f=part.theta_minus_kernel, expansion=expansion, decay=decay, remainder=part.remainder)


def zeta_mellin_data(spec: Spectrum, taylor_terms: int = TAYLOR_TERMS) -> MellinData:
    """Mellin data for theta(t) - kernel_dim of the untruncated model.

    Torus parts use their closed forms; explicit parts use the Taylor
    expansion of exp(-lambda t) with a cancellation-free remainder.
    """
    pieces = []
    for p in spec.parts:
        if isinstance(p, TorusPart):
            pieces.append((1.0, _torus_mellin(p)))
        else:
            lam, m = p.eigenvalues_and_mult()
            keep = lam > 0
            if np.any(keep):
                pieces.append((1.0, exponential_sum_data(lam[keep], m[keep], taylor_terms)))
    return combine(pieces)


def natural_split(spec: Spectrum) -> float:
    """Split point T for Mellin integrals: 1, or smaller when explicit eigenvalues are large."""
    lam_max = 0.0
    for p in spec.parts:
        if isinstance(p, ExplicitPart):
            lam, _ = p.eigenvalues_and_mult()
            if lam.size:
                lam_max = max(lam_max, float(lam.max()))
    return min(1.0, 1.0 / lam_max) if lam_max > 0 else 1.0


def model_gap(spec: Spectrum) -> float | None:
    """Smallest positive eigenvalue of the untruncated model."""
    gaps = []
    for p in spec.parts:
        if isinstance(p, TorusPart):
            gaps.append(p.gap)
        else:
            lam, _ = p.eigenvalues_and_mult()
            if np.any(lam > 0):
                gaps.append(float(lam[lam > 0].min()))
    return min(gaps) if gaps else None


def model_kernel(spec: Spectrum) -> int:
    total = 0
    for p in spec.parts:
        if isinstance(p, TorusPart):
            total += p.kernel
        else:
            total += sum(m for e, m in p.entries if e == 0)
    return total
