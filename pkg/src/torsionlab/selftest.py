"""Quick invariant suites behind ``torsionlab <command> --selftest``.

Each check returns ``(passed, detail)``.  The suites are small versions of
the test-suite properties so they run in a few seconds.
"""

from __future__ import annotations

import math

import numpy as np

from . import congruence as cg
from . import dance, linalg, spectra, torsion, zeta
from .mellin import hurwitz_zeta_prime0


def _distance(seed):
    rng = np.random.default_rng(seed)
    worst_op = worst_frob = math.inf
    recon = 0.0
    for _ in range(2000):
        n = int(rng.integers(2, 6))
        g = linalg.random_unit_det(n, rng, scale=1.0)
        c = linalg.check_distance_lemma(g)
        worst_op = min(worst_op, c.margin_op)
        worst_frob = min(worst_frob, c.margin_frob)
        pd = linalg.polar_log(g)
        w, v = np.linalg.eigh(pd.log_symmetric)
        recon = max(recon, float(np.abs(pd.orthogonal_factor @ (v * np.exp(w)) @ v.T - g).max()))
    return [
        ("distance >= log opnorm", worst_op >= -1e-9, worst_op),
        ("distance >= log frobnorm - log(n)/2", worst_frob >= -1e-9, worst_frob),
        ("polar factors reproduce g", recon < 1e-8, recon),
    ]


def _exclusion(seed):
    rng = np.random.default_rng(seed)
    certs = True
    for _ in range(50):
        n = int(rng.integers(2, 5))
        N = int(rng.integers(4, 200))
        certs &= cg.valuation_certificate(cg.random_congruent(n, N, rng), N).passed
    counts = all(cg.sl_count(2, N).consistent for N in range(2, 7))
    gamma = cg.random_congruent(2, 10, rng, unit_det=True, non_unipotent=True)
    rep = cg.verify_exclusion(gamma, 10, trials=100, seed=seed)
    return [
        ("valuation certificates", certs, 50),
        ("SL(2, Z/N) formula = enumeration", counts, "N = 2..6"),
        ("exclusion radius respected", rep.passed, rep.min_distance),
    ]


def _heat(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        L = float(rng.choice([2 * math.pi, 10.0]))
        a = float(rng.uniform(0, 1))
        t = float(10 ** rng.uniform(-3, 1))
        h = spectra.heat_trace(spectra.circle_spectrum(L, a, 500), t).value
        p = spectra.heat_trace_poisson_circle(L, a, t)
        worst = max(worst, abs(h - p) / p)
    env = spectra.decay_envelope_check(spectra.circle_spectrum(2 * math.pi, 0.5, 100), [1, 2, 5, 10, 50])
    tail_ok = True
    for _ in range(20):
        L, a, t = float(rng.uniform(1, 10)), float(rng.uniform(0, 1)), float(rng.uniform(0.05, 2))
        K = int(rng.integers(0, 10))
        small = spectra.heat_trace(spectra.circle_spectrum(L, a, K), t)
        big = spectra.heat_trace(spectra.circle_spectrum(L, a, K + 50), t)
        # the bound is exact arithmetic; allow a few ulps for summation order
        tail_ok &= big.value - small.value <= small.tail_bound + 8e-16 * big.value
    return [
        ("Poisson = direct trace", worst <= 1e-10, worst),
        ("decay envelope", env.passed, env.min_margin),
        ("tail bound covers larger cutoffs", tail_ok, 20),
    ]


def _zeta(seed):
    worst = 0.0
    for a in (0.1, 0.3, 0.5):
        z = zeta.zeta_prime_zero(spectra.circle_spectrum(2 * math.pi, a, 10))
        # zeta(s) = zeta_H(2s, a) + zeta_H(2s, 1-a) when L = 2 pi
        oracle = 2 * (hurwitz_zeta_prime0(a) + hurwitz_zeta_prime0(1 - a))
        worst = max(worst, abs(z - oracle))
    spec = spectra.circle_spectrum(2 * math.pi, 0.25, 10)
    gap = abs(zeta.zeta_from_spectrum(spec, 2.0) - zeta.zeta_from_spectrum(spec, 2.0, method="direct"))
    return [
        ("zeta'(0) = -log 4 sin^2(pi a)", worst <= 1e-6, worst),
        ("Mellin = Dirichlet at s = 2", gap <= 1e-8, gap),
    ]


def _torsion(seed):
    a = 0.25
    logT = torsion.analytic_torsion(torsion.circle_input(2 * math.pi, a)).logT
    rep = torsion.truncation_remainder(spectra.explicit_spectrum([(1.5, 1)]), 2.0)
    l2 = torsion.l2_term({1: torsion.massive_line_model(1.0)})
    return [
        ("twisted circle torsion", abs(logT - math.log(2 * math.sin(math.pi * a))) <= 1e-6, logT),
        ("truncation bound holds", rep.ok, rep.remainder),
        ("massive line L2 term", abs(l2 - 0.5) <= 1e-6, l2),
    ]


def _dance(seed):
    b = dance.ErrorBudget(3, 1.0, 0.5, 1.0, 2.0, 1.5, lam=4.0)
    beta, _ = dance.optimize_beta(b)
    grid = dance.grid_beta(b)
    bmax, lmin = dance.required_lambda(3, b, 0.0)
    rep = dance.exponents(dance.ErrorBudget(3, 1.0, 0.5, 1.0, 2.0, 1.5, lam=lmin, beta=bmax))
    return [
        ("closed-form beta = grid search", abs(beta - grid) <= 1e-3, beta - grid),
        ("boundary lambda gives min exponent n-1", abs(rep.min_exponent - 2) <= 1e-9, rep.min_exponent),
    ]


SUITES = {
    "distance": _distance,
    "exclusion": _exclusion,
    "heat": _heat,
    "zeta": _zeta,
    "torsion": _torsion,
    "dance": _dance,
}


def run(command: str, seed: int = 0) -> list:
    return [
        {"check": name, "passed": bool(ok), "detail": detail}
        for name, ok, detail in SUITES[command](seed)
    ]
