from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import circle_dirichlet, torus2_zeta

from torsionlab import spectra as S
from torsionlab import zeta as Z
from torsionlab.errors import BudgetExceeded, InputError, ZetaPole

TWO_PI = 2 * math.pi


def circle_zeta_oracle(L, alpha, s):
    """(2 pi / L)^(-2s) (zeta_H(2s, alpha) + zeta_H(2s, 1 - alpha)), zero mode dropped when alpha = 0."""
    with mpmath.workdps(30):
        s = mpmath.mpmathify(s)
        if alpha == 0:
            total = 2 * mpmath.zeta(2 * s)
        else:
            total = mpmath.zeta(2 * s, alpha) + mpmath.zeta(2 * s, 1 - alpha)
        return complex((2 * mpmath.pi / L) ** (-2 * s) * total)


def test_half_twist_at_two():
    spec = S.circle_spectrum(TWO_PI, 0.5, 20)
    mellin = Z.zeta_from_spectrum(spec, 2.0)
    direct = Z.zeta_from_spectrum(spec, 2.0, method="direct")
    # sum_k (k + 1/2)^-4 over Z = 32 sum_{j odd} j^-4 = pi^4 / 3
    assert mellin == pytest.approx(math.pi**4 / 3, rel=1e-12)
    assert abs(mellin - direct) <= 1e-8
    assert abs(direct - circle_dirichlet(TWO_PI, 0.5, 2.0)) <= 1e-9


def test_trivial_twist_negative_integers():
    # eigenvalues k^2, k != 0, multiplicity 2: zeta(s) = 2 zeta_R(2s)
    spec = S.circle_spectrum(TWO_PI, 0.0, 20)
    assert Z.zeta_from_spectrum(spec, -1.0) == pytest.approx(0.0, abs=1e-12)
    assert Z.zeta_from_spectrum(spec, -0.5) == pytest.approx(2 * (-1 / 12), abs=1e-8)
    assert Z.zeta_from_spectrum(spec, 0.0) == pytest.approx(-1.0, abs=1e-12)
    assert Z.zeta_from_spectrum(spec, -2.0) == pytest.approx(0.0, abs=1e-12)


def test_empty_spectrum_is_zero():
    empty = S.empty_spectrum()
    for s in (-2.0, 0.0, 0.5, 3.0, 1 + 1j):
        assert Z.zeta_from_spectrum(empty, s) == 0
    assert Z.zeta_prime_zero(empty) == 0


@given(
    st.sampled_from([1.0, TWO_PI, 10.0]),
    st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.83]),
    # rounding avoids an mpmath failure for |s| ~ 1e-200 with rational a
    st.floats(-2.4, 3.0).map(lambda s: round(s, 6)).filter(lambda s: abs(s - 0.5) > 1e-3),
)
def test_circle_continuation_matches_hurwitz(L, alpha, s):
    expected = circle_zeta_oracle(L, alpha, s)
    got = Z.zeta_from_spectrum(S.circle_spectrum(L, alpha, 20), s)
    assert abs(got - expected) <= 1e-8 * max(1.0, abs(expected))


@given(st.floats(1.5, 3.0), st.floats(-3, 3), st.sampled_from([(TWO_PI, 0.3), (1.0, 0.1), (10.0, 0.5), (3.0, 0.0)]))
def test_mellin_equals_dirichlet_on_circle(re, im, case):
    L, alpha = case
    s = complex(re, im) if im else re
    spec = S.circle_spectrum(L, alpha, 20)
    mellin = Z.zeta_from_spectrum(spec, s)
    direct = Z.zeta_from_spectrum(spec, s, method="direct")
    assert abs(mellin - direct) <= 1e-8


@settings(max_examples=8)
@given(st.sampled_from([1.5, 1.8, 2.2, 2.7, 3.0, 1.7 + 0.6j, -0.4, 0.2]))
def test_torus_continuation_matches_bessel_oracle(s):
    lengths, alphas = (2.0, 3.0), (0.3, 0.6)
    spec = S.torus_form_spectrum(lengths, alphas, 1, 8)
    expected = 2 * torus2_zeta(*lengths, *alphas, s)
    assert abs(Z.zeta_from_spectrum(spec, s) - expected) <= 1e-8 * max(1.0, abs(expected))


def test_torus_mellin_equals_dirichlet_where_certified():
    spec = S.torus_form_spectrum((2.0, 3.0), (0.3, 0.6), 0, 8)
    for s in (3.0, 3.0 + 1j):
        assert abs(Z.zeta_from_spectrum(spec, s) - Z.zeta_from_spectrum(spec, s, method="direct")) <= 1e-8
    # closer to the abscissa the lattice tail cannot be certified within the term budget
    with pytest.raises(BudgetExceeded):
        Z.zeta_from_spectrum(spec, 1.5, method="direct")
    res = Z.dirichlet_sum(spec, 2.5)
    assert abs(res.value - Z.zeta_from_spectrum(spec, 2.5)) <= res.tail_bound + 1e-10


def test_direct_path_needs_convergence():
    with pytest.raises(InputError):
        Z.zeta_from_spectrum(S.circle_spectrum(TWO_PI, 0.3, 10), 0.4, method="direct")
    with pytest.raises(InputError):
        Z.zeta_from_spectrum(S.circle_spectrum(TWO_PI, 0.3, 10), 2.0, method="magic")


def test_poles_are_reported():
    with pytest.raises(ZetaPole):
        Z.zeta_from_spectrum(S.circle_spectrum(TWO_PI, 0.3, 10), 0.5)
    with pytest.raises(ZetaPole):
        Z.zeta_from_spectrum(S.torus_form_spectrum((1.0, 2.0), (0.3, 0.2), 0, 5), 1.0)


def test_explicit_spectrum_is_exact_power_sum():
    spec = S.explicit_spectrum([(0.5, 2), (3.0, 1), (7.5, 4)])
    for s in (-1.3, 0.25, 2.0, 0.4 + 0.9j):
        expected = 2 * 0.5**-s + 3.0**-s + 4 * 7.5**-s
        assert abs(Z.zeta_from_spectrum(spec, s) - expected) <= 1e-9 * max(1, abs(expected))


# -- derivative at zero


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5, 0.77])
def test_twisted_circle_derivative(alpha):
    got = Z.zeta_prime_zero(S.circle_spectrum(TWO_PI, alpha, 20))
    assert got == pytest.approx(-math.log(4 * math.sin(math.pi * alpha) ** 2), abs=1e-6)


@pytest.mark.parametrize("L", [1.0, TWO_PI, 10.0, 0.3])
def test_trivial_twist_derivative(L):
    assert Z.zeta_prime_zero(S.circle_spectrum(L, 0.0, 20)) == pytest.approx(-2 * math.log(L), abs=1e-6)


@given(st.floats(0.01, 100), st.integers(1, 6))
def test_single_eigenvalue_derivative(lam, m):
    spec = S.explicit_spectrum([(lam, m)])
    assert Z.zeta_prime_zero(spec) == pytest.approx(-m * math.log(lam), abs=1e-6)


def test_torus_derivative_matches_oracle():
    lengths, alphas = (2.0, 3.0), (0.3, 0.6)
    spec = S.torus_form_spectrum(lengths, alphas, 0, 8)
    with mpmath.workdps(30):
        expected = float(mpmath.diff(lambda s: torus2_zeta(*lengths, *alphas, s).real, 0, h=1e-6))
    assert Z.zeta_prime_zero(spec) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize(
    "spec",
    [
        S.circle_spectrum(TWO_PI, 0.3, 20),
        S.circle_spectrum(10.0, 0.0, 20),
        S.explicit_spectrum([(0.7, 1), (2.0, 3)]),
        S.torus_form_spectrum((1.0, 2.0), (0.2, 0.5), 1, 6),
        S.circle_spectrum(3.0, 0.4, 20).union(S.explicit_spectrum([(5.0, 2)])),
    ],
)
def test_laurent_route_reproduces_derivative(spec):
    assert abs(Z.zeta_prime_zero_laurent(spec) - Z.zeta_prime_zero(spec)) <= 1e-6


def test_split_point_does_not_matter():
    spec = S.circle_spectrum(TWO_PI, 0.35, 20)
    for s in (-1.5, 0.3, 2.0):
        vals = [Z.zeta_from_spectrum(spec, s, T=T) for T in (0.5, 1.0, 2.0, 4.0)]
        assert max(vals) - min(vals) <= 1e-9
