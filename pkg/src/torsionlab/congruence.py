"""Exact arithmetic for principal congruence subgroups of GL(n) and SL(n).

Matrices are held as tuples of :class:`fractions.Fraction`.  The central
object is the characteristic polynomial of ``gamma - I``: for
``gamma = I (mod N)`` each coefficient ``a_k`` is divisible by
``N^(n-k)``, so a non-unipotent ``gamma`` forces some entry of any real
conjugate of ``gamma - I`` to be at least ``c_n * N`` and hence keeps the
conjugate a distance of order ``log N`` away from the identity.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BudgetExceeded,
    DetNotUnit,
    IsUnipotent,
    NotCongruent,
    NotPrime,
)
from .linalg import cartan_distance_with_inverse, random_orthogonal

INF = math.inf
DEFAULT_ENUMERATION_BUDGET = 2 * 10**7


# -- integers ---------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in _MR_WITNESSES:
        if p % q == 0:
            return p == q
    # deterministic Miller-Rabin for p < 3.3e24
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """A nontrivial factor of a composite ``n`` by Pollard's rho with Floyd cycle detection."""
    for c in range(1, n):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"no factor found for {n}")


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d < 1000 and d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    # what is left has no prime factor below 1000
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m < 1000 * 1000 or is_prime(m):
            out[m] = out.get(m, 0) + 1
        else:
            f = _pollard_rho(m)
            stack += [f, m // f]
    return dict(sorted(out.items()))


def prime_divisors(n: int) -> list[int]:
    return sorted(factorize(n))


def valuation(q, p: int):
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    q = Fraction(q)
    if q == 0:
        return INF
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def euler_phi(N: int) -> int:
    if N < 1:
        raise ValueError("euler_phi expects N >= 1")
    out = N
    for p in factorize(N):
        out = out // p * (p - 1)
    return out


# -- exact matrices ---------------------------------------------------------

@dataclass(frozen=True)
class ExactMatrix:
    """Square matrix with exact rational entries (row-major tuples of Fractions)."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        n = len(rows)
        if n < 2 or any(len(r) != n for r in rows):
            raise ValueError("ExactMatrix must be square with n >= 2")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, n: int) -> ExactMatrix:
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __add__(self, other):
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other):
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __matmul__(self, other):
        cols = list(zip(*other.entries))
        return ExactMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.entries])

    def scale(self, c) -> ExactMatrix:
        c = Fraction(c)
        return ExactMatrix([[c * a for a in r] for r in self.entries])

    def minus_identity(self) -> ExactMatrix:
        return self - ExactMatrix.identity(self.n)

    def trace(self) -> Fraction:
        return sum((self.entries[i][i] for i in range(self.n)), Fraction(0))

    def det(self) -> Fraction:
        # fraction-exact Gaussian elimination
        a = [list(r) for r in self.entries]
        n = self.n
        det = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det *= a[c][c]
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    for k in range(c, n):
                        a[r][k] -= f * a[c][k]
        return det

    def inverse(self) -> ExactMatrix:
        n = self.n
        a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.entries)]
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            a[c], a[piv] = a[piv], a[c]
            inv = 1 / a[c][c]
            a[c] = [x * inv for x in a[c]]
            for r in range(n):
                if r != c and a[r][c]:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return ExactMatrix([row[n:] for row in a])

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self.entries for x in r)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries])

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.entries]

    @classmethod
    def from_strings(cls, rows) -> ExactMatrix:
        return cls([[Fraction(x) for x in r] for r in rows])


def as_exact(g) -> ExactMatrix:
    return g if isinstance(g, ExactMatrix) else ExactMatrix(g)


def in_principal_congruence(gamma, N: int) -> bool:
    """Membership of the finite part in K(N): integral at p | N and = I mod p^v_p(N)."""
    gamma = as_exact(gamma)
    shifted = gamma.minus_identity()
    for p, e in factorize(N).items():
        for i in range(gamma.n):
            for j in range(gamma.n):
                if valuation(gamma[i, j], p) < 0 or valuation(shifted[i, j], p) < e:
                    return False
    return True


def char_poly_shifted(gamma) -> list[Fraction]:
    """Coefficients ``[a_0, ..., a_{n-1}]`` of ``det(xI - (gamma - I))`` (monic term omitted).

    Faddeev-LeVerrier recursion, exact over the rationals.
    """
    a = as_exact(gamma).minus_identity()
    n = a.n
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    eye = ExactMatrix.identity(n)
    m = ExactMatrix([[0] * n for _ in range(n)])
    for k in range(1, n + 1):
        m = a @ m + eye.scale(coeffs[n - k + 1])
        coeffs[n - k] = -(a @ m).trace() / k
    return coeffs[:n]


def is_unipotent(gamma) -> bool:
    a = as_exact(gamma).minus_identity()
    p = a
    for _ in range(a.n - 1):
        p = p @ a
    return all(x == 0 for r in p.entries for x in r)


@dataclass(frozen=True)
class CertificateRow:
    p: int
    k: int
    val: float  # int, or math.inf for a vanishing coefficient
    required: int

    @property
    def ok(self) -> bool:
        return self.val >= self.required


@dataclass(frozen=True)
class ValuationCertificate:
    N: int
    gamma: ExactMatrix
    coefficients: tuple
    table: tuple
    passed: bool

    def to_json(self) -> dict:
        return {
            "n": self.gamma.n,
            "N": self.N,
            "gamma": self.gamma.to_strings(),
            "coefficients": [str(c) for c in self.coefficients],
            "rows": [
                {"p": r.p, "k": r.k, "val": "inf" if r.val == INF else int(r.val), "required": r.required}
                for r in self.table
            ],
            "passed": self.passed,
        }

    @classmethod
    def from_json(cls, data: dict) -> ValuationCertificate:
        rows = tuple(
            CertificateRow(r["p"], r["k"], INF if r["val"] == "inf" else int(r["val"]), r["required"])
            for r in data["rows"]
        )
        gamma = ExactMatrix.from_strings(data["gamma"])
        coeffs = tuple(Fraction(c) for c in data.get("coefficients", char_poly_shifted(gamma)))
        return cls(N=data["N"], gamma=gamma, coefficients=coeffs, table=rows, passed=bool(data["passed"]))


def valuation_certificate(gamma, N: int) -> ValuationCertificate:
    """Tabulate v_p(a_k) against (n - k) v_p(N) for every p | N and every k < n."""
    gamma = as_exact(gamma)
    if N < 3:
        raise ValueError("level N must be >= 3")
    if not in_principal_congruence(gamma, N):
        raise NotCongruent(f"gamma is not congruent to I modulo {N}")
    coeffs = char_poly_shifted(gamma)
    n = gamma.n
    rows = []
    for p, e in sorted(factorize(N).items()):
        for k in range(n):
            rows.append(CertificateRow(p=p, k=k, val=valuation(coeffs[k], p), required=(n - k) * e))
    return ValuationCertificate(
        N=N, gamma=gamma, coefficients=tuple(coeffs), table=tuple(rows), passed=all(r.ok for r in rows)
    )


# -- exclusion radius ---------------------------------------------------------

@dataclass(frozen=True)
class ExclusionBound:
    n: int
    N: int
    c_n: Fraction
    radius: float
    C_n: float
    N_0: int


REPORTING_CONSTANT = 0.25


def _radius(n: int, N: int) -> float:
    c = 1.0 / (2**n * math.factorial(n))
    gap = c * N - math.sqrt(n)
    if gap <= 1.0:
        return 0.0
    return max(0.0, math.log(gap) - 0.5 * math.log(n))


def _threshold_level(n: int, C: float) -> int:
    # radius(N) - C log N is increasing wherever radius > 0, so the first crossing is final
    def ok(N):
        return _radius(n, N) >= C * math.log(N)

    hi = 3
    while not ok(hi):
        hi *= 2
    lo = max(3, hi // 2)
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def exclusion_radius(n: int, N: int) -> ExclusionBound:
    """Radius below which no non-unipotent conjugate of Gamma(N) can reach the identity.

    With ``c_n = 1/(2^n n!)`` some entry of ``g - I`` exceeds ``c_n N``, so
    ``||g||_F >= c_n N - sqrt(n)`` and
    ``r(g) >= log(c_n N - sqrt(n)) - log(n)/2``.
    """
    if n < 2 or N < 3:
        raise ValueError("need n >= 2 and N >= 3")
    return ExclusionBound(
        n=n,
        N=N,
        c_n=Fraction(1, 2**n * math.factorial(n)),
        radius=_radius(n, N),
        C_n=REPORTING_CONSTANT,
        N_0=_threshold_level(n, REPORTING_CONSTANT),
    )


@dataclass(frozen=True)
class ExclusionReport:
    min_distance: float
    bound: float
    passed: bool
    trials: int
    seed: int | None
    distances: tuple = field(default=(), repr=False)


def task_rng(seed, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def random_conjugator(n: int, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """``k1 diag(exp(z)) k2`` with Haar-random orthogonal ``k1, k2`` and Gaussian ``z``."""
    k1 = random_orthogonal(n, rng)
    k2 = random_orthogonal(n, rng)
    z = spread * rng.standard_normal(n)
    return (k1 * np.exp(z - z.mean())) @ k2


def verify_exclusion(gamma, N: int, trials: int = 1000, seed: int = 0, conjugators=None,
                     spread: float = 0.5) -> ExclusionReport:
    """Sample real conjugates ``x^-1 gamma x`` and compare their distance to the exclusion radius."""
    gamma = as_exact(gamma)
    if not (gamma.is_integral() and in_principal_congruence(gamma, N)):
        raise NotCongruent(f"gamma must be an integral matrix congruent to I modulo {N}")
    if is_unipotent(gamma):
        raise IsUnipotent("gamma is unipotent; it lies in every neighbourhood of the identity class")
    if abs(gamma.det()) != 1:
        raise DetNotUnit("|det gamma| must be 1")
    g = gamma.to_float()
    g_inv = gamma.inverse().to_float()
    n = gamma.n
    bound = exclusion_radius(n, N).radius
    if conjugators is None:
        conjugators = (random_conjugator(n, task_rng(seed, i), spread) for i in range(trials))
    dists = []
    for x in conjugators:
        x_inv = np.linalg.inv(x)
        dists.append(cartan_distance_with_inverse(x_inv @ g @ x, x_inv @ g_inv @ x))
    m = min(dists)
    return ExclusionReport(
        min_distance=m, bound=bound, passed=m >= bound, trials=len(dists), seed=seed, distances=tuple(dists)
    )


# -- random congruent matrices ------------------------------------------------

def _random_sl_congruent_int(n: int, N: int, rng: np.random.Generator, spread: int) -> list[list[int]]:
    # lower-right block recursively in Gamma(N); the (0, 0) entry is then solved
    # for so that det = 1 (its cofactor is the block's determinant, 1)
    if n == 1:
        return [[1]]
    block = _random_sl_congruent_int(n - 1, N, rng, spread)
    g = [[0] * n for _ in range(n)]
    for i in range(1, n):
        for j in range(1, n):
            g[i][j] = block[i - 1][j - 1]
    for j in range(1, n):
        g[0][j] = N * int(rng.integers(-spread, spread + 1))
        g[j][0] = N * int(rng.integers(-spread, spread + 1))
    rest = ExactMatrix(g).det()  # determinant with g[0][0] = 0
    g[0][0] = int(1 - rest)
    return g


def random_congruent(n: int, N: int, rng: np.random.Generator, unit_det: bool = False,
                     spread: int = 3, non_unipotent: bool = False, mix: int = 0) -> ExactMatrix:
    """Random integral ``gamma = I (mod N)``; optionally with det 1 and/or non-unipotent.

    ``mix`` applies that many random elementary unimodular conjugations
    (Gamma(N) is normal in GL(n, Z)); they grow the entries quickly.
    """
    while True:
        if unit_det:
            g = ExactMatrix(_random_sl_congruent_int(n, N, rng, spread))
            for _ in range(mix):
                i, j = rng.choice(n, size=2, replace=False)
                e = [[int(a == b) for b in range(n)] for a in range(n)]
                e[i][j] = int(rng.choice([-1, 1]))
                u = ExactMatrix(e)
                g = u @ g @ u.inverse()
        else:
            b = rng.integers(-spread, spread + 1, size=(n, n))
            g = ExactMatrix([[int(i == j) + N * int(b[i, j]) for j in range(n)] for i in range(n)])
        if not non_unipotent or not is_unipotent(g):
            return g


# -- group orders and volume scaling -----------------------------------------

def sl_count_formula(n: int, N: int) -> int:
    """|SL(n, Z/NZ)| = N^(n^2-1) prod_{p|N} prod_{k=2..n} (1 - p^-k), exactly."""
    num = N ** (n * n - 1)
    for p in factorize(N):
        for k in range(2, n + 1):
            num = num * (p**k - 1) // p**k
    return num


def _det_int(mats: np.ndarray) -> np.ndarray:
    n = mats.shape[-1]
    if n == 1:
        return mats[..., 0, 0]
    if n == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    total = np.zeros(mats.shape[:-2], dtype=np.int64)
    for j in range(n):
        minor = np.delete(np.delete(mats, 0, axis=-2), j, axis=-1)
        total += (-1) ** j * mats[..., 0, j] * _det_int(minor)
    return total


def sl_count_bruteforce(n: int, N: int, budget: int = DEFAULT_ENUMERATION_BUDGET, chunk: int = 1 << 20) -> int:
    """Enumerate all n x n matrices over Z/NZ and count those with det = 1."""
    total = N ** (n * n)
    if total > budget:
        raise BudgetExceeded(f"{total} matrices exceeds enumeration budget {budget}")
    powers = N ** np.arange(n * n, dtype=np.int64)
    count = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % N
        mats = digits.reshape(-1, n, n)
        count += int(np.count_nonzero(_det_int(mats) % N == 1 % N))
    return count


@dataclass(frozen=True)
class GroupCount:
    n: int
    N: int
    formula: int
    enumerated: int | None

    @property
    def value(self) -> int:
        return self.formula

    @property
    def consistent(self) -> bool | None:
        return None if self.enumerated is None else self.enumerated == self.formula


def sl_count(n: int, N: int, budget: int = DEFAULT_ENUMERATION_BUDGET, check: bool = True) -> GroupCount:
    """|SL(n, Z/NZ)| by formula, cross-checked by enumeration when within budget."""
    if n < 2 or N < 2:
        raise ValueError("need n >= 2 and N >= 2")
    formula = sl_count_formula(n, N)
    enumerated = None
    if check:
        try:
            enumerated = sl_count_bruteforce(n, N, budget)
        except BudgetExceeded:
            enumerated = None
    return GroupCount(n=n, N=N, formula=formula, enumerated=enumerated)


def gl_sl_torsion_scale(N: int, logT_X: float) -> float:
    """log T_Y(N) = phi(N) log T_X(N): Y(N) is phi(N) disjoint copies of X(N)."""
    return euler_phi(N) * logT_X


def volume_proxy(n: int, N: int) -> float:
    """Index-type proxy N^(n^2-1) prod (1 - p^-k) for vol(X(N)), as a float."""
    out = float(N) ** (n * n - 1)
    for p in factorize(N):
        for k in range(2, n + 1):
            out *= 1.0 - float(p) ** (-k)
    return out


def gamma_from_rows(rows: Sequence[Sequence]) -> ExactMatrix:
    return ExactMatrix([[Fraction(x) for x in r] for r in rows])


__all__ = [
    "ExactMatrix",
    "ExclusionBound",
    "ExclusionReport",
    "GroupCount",
    "ValuationCertificate",
    "char_poly_shifted",
    "euler_phi",
    "exclusion_radius",
    "factorize",
    "gl_sl_torsion_scale",
    "in_principal_congruence",
    "is_prime",
    "is_unipotent",
    "random_congruent",
    "sl_count",
    "sl_count_bruteforce",
    "sl_count_formula",
    "valuation",
    "valuation_certificate",
    "verify_exclusion",
    "volume_proxy",
]

