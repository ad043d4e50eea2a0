"""Choosing the truncation parameters so every error term beats N^-(n-1).

With T = beta log N and R = Cn log N the three error terms decay like
N^-e0, N^-e1, N^-e2 with

    e0 = lambda (1 - eps) beta
    e1 = C4 Cn^2 / beta - C2 beta
    e2 = lambda beta

e1 falls with beta while e0 and e2 rise, so the best beta balances e1 against
e0 (the smaller of e0 and e2).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.special import exp1

from .congruence import volume_proxy
from .errors import Infeasible, InputError

# e1 forms: derived C4 Cn^2/beta - C2 beta; unit_c2 sets C2 = 1; linear_cn uses Cn instead of Cn^2
VARIANTS = ("derived", "unit_c2", "linear_cn")
GRID_STEP = 1e-4
GRID_MAX = 10.0


@dataclass(frozen=True)
class ErrorBudget:
    n: int
    C1: float
    C2: float
    C3: float
    C4: float
    Cn: float
    lam: float | None = None
    epsilon: float = 0.01
    beta: float | None = None
    variant: str = "derived"

    def __post_init__(self):
        if self.n < 2:
            raise InputError("n must be >= 2")
        for name in ("C1", "C3", "C4", "Cn"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not self.C2 >= 0:
            raise InputError("C2 must be non-negative")
        if not 0 <= self.epsilon < 1:
            raise InputError("epsilon must lie in [0, 1)")
        if self.lam is not None and not self.lam > 0:
            raise InputError("lambda must be positive")
        if self.beta is not None and not self.beta > 0:
            raise InputError("beta must be positive")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}")

    def T(self, N: float) -> float:
        return self.beta * math.log(N)

    def R(self, N: float) -> float:
        return self.Cn * math.log(N)

    @property
    def e1_coefficients(self) -> tuple:
        """(A, B) with e1 = A / beta - B beta for the selected variant."""
        if self.variant == "derived":
            return self.C4 * self.Cn**2, self.C2
        if self.variant == "unit_c2":
            return self.C4 * self.Cn**2, 1.0
        return self.C4 * self.Cn, self.C2

    def to_json(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json(cls, obj: dict) -> ErrorBudget:
        try:
            kw = dict(obj)
            if "lambda" in kw:
                kw["lam"] = kw.pop("lambda")
            allowed = {f for f in cls.__dataclass_fields__}
            unknown = set(kw) - allowed
            if unknown:
                raise InputError(f"unknown budget fields {sorted(unknown)}")
            return cls(**kw)
        except TypeError as exc:
            raise InputError(f"malformed budget: {exc}") from exc


@dataclass(frozen=True)
class ExponentReport:
    e0: float
    e1: float
    e2: float
    min_exponent: float
    feasible: bool
    lambda_required: float
    beta: float

    def to_json(self) -> dict:
        return asdict(self)


def _e(budget: ErrorBudget, beta):
    A, B = budget.e1_coefficients
    lam = budget.lam
    return lam * (1 - budget.epsilon) * beta, A / beta - B * beta, lam * beta


def exponents(budget: ErrorBudget) -> ExponentReport:
    if budget.lam is None or budget.beta is None:
        raise InputError("exponents need both lambda and beta")
    e0, e1, e2 = _e(budget, budget.beta)
    m = min(e0, e1, e2)
    target = budget.n - 1
    return ExponentReport(
        e0=e0, e1=e1, e2=e2, min_exponent=m, feasible=m > target,
        lambda_required=target / ((1 - budget.epsilon) * budget.beta), beta=budget.beta,
    )


def grid_beta(budget: ErrorBudget, step: float = GRID_STEP, upper: float = GRID_MAX) -> float:
    """Brute-force argmax of min(e0, e1, e2) over beta in (0, upper]."""
    betas = np.arange(1, int(round(upper / step)) + 1) * step
    e0, e1, e2 = _e(budget, betas)
    return float(betas[np.argmax(np.minimum(np.minimum(e0, e1), e2))])


def optimize_beta(budget: ErrorBudget) -> tuple:
    """Balance e1 against e0: beta* = sqrt(A / (lambda (1 - eps) + B)).

    Raises Infeasible (carrying beta and the report) if even the best beta
    leaves min_exponent <= n - 1.
    """
    if budget.lam is None:
        raise InputError("optimize_beta needs lambda")
    A, B = budget.e1_coefficients
    beta = math.sqrt(A / (budget.lam * (1 - budget.epsilon) + B))
    report = exponents(replace(budget, beta=beta))
    if not report.feasible:
        raise Infeasible(
            f"best min exponent {report.min_exponent:.6g} does not exceed n-1 = {budget.n - 1}",
            beta=beta, report=report,
        )
    return beta, report


def _coeffs(consts) -> tuple:
    if isinstance(consts, ErrorBudget):
        return consts.e1_coefficients + (consts.epsilon,)
    get = consts.get
    variant = get("variant", "derived")
    C2, C4, Cn = float(get("C2")), float(get("C4")), float(get("Cn"))
    eps = float(get("epsilon", 0.01))
    if variant == "derived":
        return C4 * Cn**2, C2, eps
    if variant == "unit_c2":
        return C4 * Cn**2, 1.0, eps
    return C4 * Cn, C2, eps


def required_lambda(n: int, consts, delta: float) -> tuple:
    """(beta_max, lambda_min): beta_max solves e1 = n - 1, lambda_min puts e0 a factor (1+delta) above n - 1.

    With delta = 0 both e0 and e1 sit exactly on n - 1.  Only C2, C4, Cn and
    epsilon enter; C1 and C3 are never read.
    """
    if n < 2:
        raise InputError("n must be >= 2")
    if delta < 0:
        raise InputError("delta must be non-negative")
    A, B, eps = _coeffs(consts)
    if not A > 0 or B < 0:
        raise InputError("constants must be positive")
    k = n - 1
    # positive root of B beta^2 + k beta - A, rationalized so small B does not cancel
    beta_max = 2 * A / (k + math.sqrt(k * k + 4 * A * B))
    return beta_max, (1 + delta) * k / ((1 - eps) * beta_max)


def theorem_rhs(n: int, N: float, a: float, vol: float) -> float:
    """vol * N^-(n-1) * (log N)^a."""
    if N < 3:
        raise InputError("N must be >= 3")
    if not vol > 0:
        raise InputError("volume must be positive")
    return vol * N ** (-(n - 1)) * math.log(N) ** a


@dataclass(frozen=True)
class BudgetRow:
    N: float
    T: float
    R: float
    vol: float
    bound_E0: float
    bound_E1: float
    bound_E2: float
    rhs: float

    @property
    def within(self) -> bool:
        return max(self.bound_E0, self.bound_E1, self.bound_E2) <= self.rhs


@dataclass(frozen=True)
class BudgetTable:
    beta: float
    report: ExponentReport
    rows: tuple
    N1: float | None

    COLUMNS = ("N", "T", "R", "vol", "bound_E0", "bound_E1", "bound_E2", "rhs")

    def to_json(self) -> dict:
        return {"beta": self.beta, "report": self.report.to_json(), "N1": self.N1,
                "rows": [asdict(r) for r in self.rows]}


def budget_table(n: int, consts: ErrorBudget, lam: float, N_list, a: float = 0.0, vol=None) -> BudgetTable:
    """Explicit error bounds per level N at the optimal beta.

    E0 ~ e^(-lambda (1-eps) T) vol, E2 ~ e^(-lambda T) vol and
    E1 ~ C3 e^(-C4 R^2/T + C2 T) E_1(C4 R^2 / T) vol, where the exponential
    integral is int_0^(T/R^2) e^(-C4/t) t^-1 dt.  ``vol`` is a number, a
    callable of N, or None for the level-structure proxy.  N1 is the first
    listed level from which every later row stays within the right-hand side.
    """
    budget = replace(consts, n=n, lam=lam)
    beta, report = optimize_beta(budget)
    budget = replace(budget, beta=beta)
    rows = []
    for N in N_list:
        if N < 3:
            raise InputError("levels must be >= 3")
        if vol is None:
            v = volume_proxy(n, int(N))
        elif callable(vol):
            v = float(vol(N))
        else:
            v = float(vol)
        T, R = budget.T(N), budget.R(N)
        x = budget.C4 * R * R / T
        e0 = math.exp(-lam * (1 - budget.epsilon) * T) * v
        e1 = budget.C3 * math.exp(-x + budget.C2 * T) * float(exp1(x)) * v
        e2 = math.exp(-lam * T) * v
        rows.append(BudgetRow(float(N), T, R, v, e0, e1, e2, theorem_rhs(n, N, a, v)))
    N1 = None
    for r in reversed(rows):
        if not r.within:
            break
        N1 = r.N
    return BudgetTable(beta, report, tuple(rows), N1)
