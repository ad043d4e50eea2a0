"""Ray-Singer analytic torsion of model spectra and its truncation error terms.

    log T = 1/2 sum_{p=1}^{d} (-1)^p p zeta_p'(0)

For gapped spectra every zeta_p is holomorphic at 0, so the finite part of
zeta_p(s)/s is just zeta_p'(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HasKernel, InputError, NonpositiveT, NotAcyclic, PoleRemains
from .mellin import (
    EULER_GAMMA,
    DecayCertificate,
    MellinData,
    _quad,
    combine,
    exponential_sum_data,
    finite_part,
    head_laurent,
    mellin_laurent,
    tail_integral,
)
from .spectra import (
    ExplicitPart,
    Spectrum,
    circle_spectrum,
    model_gap,
    model_heat_trace,
    model_kernel,
    torus_form_spectrum,
    zeta_mellin_data,
)
from .zeta import zeta_prime_zero, zeta_prime_zero_laurent


@dataclass(frozen=True)
class TorsionInput:
    dim: int
    per_degree: dict
    lam: float | None = None
    kernel_removed_override: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dimension must be >= 1")
        for p, spec in self.per_degree.items():
            if not 0 <= p <= self.dim:
                raise InputError(f"form degree {p} outside [0, {self.dim}]")
            if spec.dim != self.dim:
                raise InputError(f"degree {p} spectrum has dimension {spec.dim}, expected {self.dim}")
        if self.lam is not None and not self.lam > 0:
            raise InputError("declared gap must be positive")

    def acyclicity_problems(self) -> list:
        out = []
        for p, spec in sorted(self.per_degree.items()):
            if model_kernel(spec) > 0 or spec.kernel_dim > 0:
                out.append(f"degree {p} has zero modes")
            g = model_gap(spec)
            if self.lam is not None and g is not None and g < self.lam:
                out.append(f"degree {p} gap {g:.6g} is below the declared {self.lam:.6g}")
        return out

    @property
    def strongly_acyclic(self) -> bool:
        return not self.acyclicity_problems()

    def union(self, other: TorsionInput) -> TorsionInput:
        if other.dim != self.dim:
            raise InputError("dimensions differ")
        degrees = set(self.per_degree) | set(other.per_degree)
        joined = {}
        for p in degrees:
            a, b = self.per_degree.get(p), other.per_degree.get(p)
            joined[p] = a.union(b) if a is not None and b is not None else (a or b)
        lam = None if self.lam is None or other.lam is None else min(self.lam, other.lam)
        return TorsionInput(self.dim, joined, lam, self.kernel_removed_override or other.kernel_removed_override)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "lambda": self.lam,
            "kernel_removed_override": self.kernel_removed_override,
            "per_degree": {str(p): s.to_json() for p, s in sorted(self.per_degree.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> TorsionInput:
        try:
            per = {int(p): Spectrum.from_json(s) for p, s in obj["per_degree"].items()}
            return cls(int(obj["dim"]), per, obj.get("lambda"), bool(obj.get("kernel_removed_override", False)))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed torsion input: {exc}") from exc


def circle_input(L: float, alpha: float, K: int = 20, override: bool = False) -> TorsionInput:
    """Twisted circle: functions and 1-forms carry the same spectrum."""
    s = circle_spectrum(L, alpha, K)
    return TorsionInput(1, {0: s, 1: s}, None, override)


def torus_input(lengths, alphas, K: int = 8, override: bool = False) -> TorsionInput:
    d = len(lengths)
    return TorsionInput(d, {p: torus_form_spectrum(lengths, alphas, p, K) for p in range(d + 1)}, None, override)


@dataclass(frozen=True)
class TorsionResult:
    logT: float
    per_degree_zeta_prime: dict
    laurent_check: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.logT

    def to_json(self) -> dict:
        return {
            "logT": self.logT,
            "per_degree_zeta_prime": {str(p): v for p, v in sorted(self.per_degree_zeta_prime.items())},
            "laurent_check": {str(p): v for p, v in sorted(self.laurent_check.items())},
        }


def analytic_torsion(inp: TorsionInput, cross_check: bool = False) -> TorsionResult:
    """Torsion from finite-difference zeta'(0); ``cross_check`` adds the Laurent route per degree."""
    problems = inp.acyclicity_problems()
    if problems and not inp.kernel_removed_override:
        raise NotAcyclic("; ".join(problems))
    zp, check = {}, {}
    total = 0.0
    for p, spec in sorted(inp.per_degree.items()):
        if p == 0:
            continue
        zp[p] = zeta_prime_zero(spec)
        if cross_check:
            check[p] = zp[p] - zeta_prime_zero_laurent(spec)
        total += (-1) ** p * p * zp[p]
    return TorsionResult(0.5 * total, zp, check)


# -- truncation error terms ------------------------------------------------------------

@dataclass(frozen=True)
class TruncationReport:
    T: float
    value_full: float
    value_truncated: float
    remainder: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.remainder) <= self.bound


def _check_T(T):
    if not T > 0:
        raise NonpositiveT("T must be positive")
    if T < 1:
        raise InputError("the truncation bounds are stated for T >= 1")


def _explicit_truncated_fp(lam: np.ndarray, mult: np.ndarray, T: float) -> float:
    # FP at s=0 of int_0^T e^(-l t) t^(s-1) dt = log T + int_0^T expm1(-l t)/t dt
    total = 0.0
    for l, m in zip(lam, mult):
        val = _quad(lambda u: complex(math.expm1(-u) / u), 0.0, l * T)
        total += m * (math.log(T) + val)
    return total


def truncation_remainder(spec: Spectrum, T: float, epsilon: float = 0.01) -> TruncationReport:
    """E0 analogue: int_T^inf theta(t) t^-1 dt with its explicit exponential bound.

    ``bound = theta(1) e^gap e^(-gap (1-eps) T) / (gap (1-eps) T)``, valid for
    T >= 1 because every mode obeys e^(-l t) <= e^(-l) e^(-gap (t-1)).
    """
    _check_T(T)
    if not 0 <= epsilon < 1:
        raise InputError("epsilon must lie in [0, 1)")
    if model_kernel(spec) > 0:
        raise HasKernel("truncation bounds need a spectrum without zero modes")
    gap = model_gap(spec)
    if gap is None:
        return TruncationReport(T, 0.0, 0.0, 0.0, 0.0)
    theta1 = model_heat_trace(spec, 1.0)
    lam_eff = gap * (1 - epsilon)
    bound = theta1 * math.exp(gap) * math.exp(-lam_eff * T) / (lam_eff * T)

    decay = DecayCertificate(gap, theta1 * math.exp(gap), 1.0)

    def theta(t):
        return model_heat_trace(spec, t)

    remainder = tail_integral(theta, decay, T, lambda t: complex(1.0 / t), 0.0)
    full = 0.0
    truncated = 0.0
    for part in spec.parts:
        if isinstance(part, ExplicitPart):
            lam, m = part.eigenvalues_and_mult()
            full += float(np.sum(m * (-EULER_GAMMA - np.log(lam))))
            truncated += _explicit_truncated_fp(lam, m, T)
        else:
            data = zeta_mellin_data(Spectrum(spec.dim, (part,)))
            full += mellin_laurent(data, 1.0, 0)[0].real
            truncated += head_laurent(data.expansion, T, 0)[0].real
            truncated += _quad(lambda t: complex(data.rem(t) / t), 0.0, min(T, 1.0))
            if T > 1:
                truncated += _quad(lambda t: complex(data.rem(t) / t), 1.0, T)
    return TruncationReport(T, float(full), float(truncated), float(remainder), bound)


@dataclass(frozen=True)
class E2Report:
    T: float
    value: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.value) <= self.bound


def e2_remainder(h, T: float, gap: float) -> E2Report:
    """E2 analogue: int_T^inf h(t) t^-1 dt, certified by C' e^(-gap T) with C' = h(1) e^gap / gap.

    ``h`` is a callable or MellinData; it must obey h(t) <= h(1) e^(-gap (t-1))
    for t >= 1, as any positive combination of modes with rate >= gap does.
    """
    _check_T(T)
    if not gap > 0:
        raise InputError("gap must be positive")
    f = h.f if isinstance(h, MellinData) else h
    h1 = abs(f(1.0))
    decay = DecayCertificate(gap, h1 * math.exp(gap), 1.0)
    value = tail_integral(f, decay, T, lambda t: complex(1.0 / t), 0.0)
    bound = h1 * math.exp(gap) / gap * math.exp(-gap * T)
    return E2Report(T, float(value), bound)


# -- L2 term ------------------------------------------------------------------------------

def alternating_data(per_degree: dict) -> MellinData:
    """sum_p (-1)^p p data_p."""
    return combine([((-1) ** p * p, d) for p, d in sorted(per_degree.items()) if p])


def l2_term(per_degree: dict, T: float = 1.0, order: int = 2) -> float:
    """1/2 d/ds [ M(s) / Gamma(s) ] at s = 0, M the Mellin transform of the alternating sum.

    1/Gamma cancels a simple pole of M, so only a pole of order >= 2 (from
    log t terms at t^0) survives and is reported.
    """
    if not per_degree:
        return 0.0
    data = alternating_data(per_degree)
    if not data.expansion.terms and data.decay is not None and data.decay.constant == 0:
        return 0.0
    F = mellin_laurent(data, T, order)
    if F.pole_order(1e-12) >= 2:
        raise PoleRemains(f"the alternating Mellin transform has a pole of order {F.pole_order(1e-12)} at 0")
    # d/ds [s M(s) / (s Gamma(s))] at 0 is the s^0 coefficient of M(s) / (s Gamma(s))
    return 0.5 * finite_part(F, multiply_recip_gamma=True)


def massive_line_model(m: float, taylor_terms: int = 6) -> MellinData:
    """Identity trace (4 pi t)^(-1/2) e^(-m^2 t) of a massive operator on the line."""
    if not m > 0:
        raise InputError("mass must be positive")
    return exponential_sum_data([m * m], [1 / math.sqrt(4 * math.pi)], taylor_terms, power=-0.5)
