from __future__ import annotations

import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torsionlab import spectra as S
from torsionlab.errors import HasKernel, InputError, NonpositiveTime, UnsupportedModel

TWO_PI = 2 * math.pi


def theta_oracle(L, alpha, t):
    """sum_k exp(-t (2 pi (k + alpha) / L)^2) through mpmath's Jacobi theta_3."""
    with mpmath.workdps(40):
        c = t * (2 * mpmath.pi / L) ** 2
        a = mpmath.mpf(alpha)
        # sum_k e^(-c (k+a)^2) = e^(-c a^2) theta_3(i c a, e^(-c))
        return float(mpmath.exp(-c * a * a) * mpmath.jtheta(3, 1j * c * a, mpmath.exp(-c)).real)


def as_dict(spec):
    return {round(e, 12): m for e, m in spec.entries}


# -- construction


def test_circle_examples():
    assert as_dict(S.circle_spectrum(TWO_PI, 0.0, 1)) == {0.0: 1, 1.0: 2}
    assert as_dict(S.circle_spectrum(TWO_PI, 0.5, 0)) == {0.25: 1}
    # k in {-1, 0, 1} with alpha = 1/4: (k + 1/4)^2 = 9/16, 1/16, 25/16
    assert as_dict(S.circle_spectrum(TWO_PI, 0.25, 1)) == {0.0625: 1, 0.5625: 1, 1.5625: 1}


def test_circle_kernel_only_without_twist():
    assert S.circle_spectrum(3.0, 0.0, 5).kernel_dim == 1
    assert S.circle_spectrum(3.0, 0.2, 5).kernel_dim == 0


@given(st.floats(0.5, 20), st.floats(0, 0.999), st.integers(0, 30))
def test_circle_matches_enumeration(L, alpha, K):
    spec = S.circle_spectrum(L, alpha, K)
    raw = sorted((TWO_PI * (k + alpha) / L) ** 2 for k in range(-K, K + 1))
    expanded = [e for e, m in spec.entries for _ in range(m)]
    assert np.allclose(expanded, raw, rtol=1e-12, atol=0)
    assert all(b > a for (a, _), (b, _) in zip(spec.entries, spec.entries[1:]))


def test_torus_multiplicities():
    for p, mult in ((0, 1), (1, 2), (2, 1)):
        spec = S.torus_form_spectrum((TWO_PI, TWO_PI), (0.0, 0.0), p, 1)
        assert as_dict(spec)[1.0] == 4 * mult
        assert spec.kernel_dim == mult
    base = S.torus_form_spectrum((1.0, 2.0), (0.1, 0.3), 0, 3)
    one = S.torus_form_spectrum((1.0, 2.0), (0.1, 0.3), 1, 3)
    assert [m for _, m in one.entries] == [2 * m for _, m in base.entries]
    with pytest.raises(InputError):
        S.torus_form_spectrum((1.0, 2.0), (0.1, 0.3), 3, 3)


def test_one_dimensional_torus_is_circle():
    a = S.torus_form_spectrum((3.0,), (0.2,), 1, 7)
    b = S.circle_spectrum(3.0, 0.2, 7)
    assert a.entries == b.entries


def test_spectrum_metadata_and_json():
    spec = S.circle_spectrum(TWO_PI, 0.5, 4)
    assert spec.gap == pytest.approx(0.25)
    assert spec.cutoff["kind"] == "circle" and spec.cutoff["K"] == 4
    again = S.Spectrum.from_json(json.loads(json.dumps(spec.to_json())))
    assert again.entries == spec.entries
    raw = S.Spectrum.from_json({"dim": 1, "entries": [[0.0, 2], [3.0, 1]]})
    assert raw.kernel_dim == 2 and raw.gap == 3.0
    with pytest.raises(InputError):
        S.Spectrum.from_json({"dim": 1, "entries": [[0.0, 2]], "kernel_dim": 1})
    with pytest.raises(InputError):
        S.explicit_spectrum([(-1.0, 1)])


def test_union_and_copies():
    a = S.explicit_spectrum([(1.0, 1), (2.0, 3)])
    b = S.explicit_spectrum([(2.0, 1)])
    assert as_dict(a.union(b)) == {1.0: 1, 2.0: 4}
    assert as_dict(a.copies(3)) == {1.0: 3, 2.0: 9}
    assert S.circle_spectrum(1.0, 0.0, 2).without_kernel().kernel_dim == 0


# -- heat traces


def test_heat_trace_single_mode():
    h = S.heat_trace(S.explicit_spectrum([(1.0, 1)]), 2.0)
    assert h.value == pytest.approx(math.exp(-2))
    assert h.tail_bound == 0
    with pytest.raises(NonpositiveTime):
        S.heat_trace(S.explicit_spectrum([(1.0, 1)]), 0.0)
    with pytest.raises(NonpositiveTime):
        S.heat_trace_poisson_circle(1.0, 0.0, -1.0)


def test_heat_trace_matches_poisson_at_one():
    h = S.heat_trace(S.circle_spectrum(TWO_PI, 0.0, 200), 1.0)
    assert abs(h.value - S.heat_trace_poisson_circle(TWO_PI, 0.0, 1.0)) <= 1e-12
    assert abs(h.value - theta_oracle(TWO_PI, 0.0, 1.0)) <= 1e-12


def test_heat_trace_small_time_counts_modes():
    spec = S.circle_spectrum(TWO_PI, 0.3, 10)
    h = S.heat_trace(spec, 1e-9)
    assert h.value == pytest.approx(21, rel=1e-6)
    assert not h.reliable
    assert S.heat_trace(spec, 5.0).reliable


@given(st.sampled_from([TWO_PI, 10.0, 3.0]), st.floats(0, 0.999), st.floats(-3, 1))
def test_poisson_matches_theta_function(L, alpha, log_t):
    t = 10**log_t
    expected = theta_oracle(L, alpha, t)
    assert S.heat_trace_poisson_circle(L, alpha, t) == pytest.approx(expected, rel=1e-10)
    assert S.circle_theta(L, alpha, t) == pytest.approx(expected, rel=1e-10)


@given(st.sampled_from([TWO_PI, 10.0]), st.floats(0, 1), st.floats(-3, 1))
def test_poisson_matches_direct(L, alpha, log_t):
    alpha = min(alpha, 0.999)
    t = 10**log_t
    direct = S.heat_trace(S.circle_spectrum(L, alpha, 500), t).value
    assert direct == pytest.approx(S.heat_trace_poisson_circle(L, alpha, t), rel=1e-10)


@given(st.floats(0.5, 20), st.floats(0.001, 0.999), st.floats(1e-3, 10))
def test_poisson_twist_symmetry(L, alpha, t):
    a = S.heat_trace_poisson_circle(L, alpha, t)
    b = S.heat_trace_poisson_circle(L, 1 - alpha, t)
    assert a == pytest.approx(b, rel=1e-12)


def test_poisson_small_time_leading_term():
    L, t = TWO_PI, 0.05
    lead = L / math.sqrt(4 * math.pi * t)
    p = S.heat_trace_poisson_circle(L, 0.0, t)
    # the first correction is 2 lead e^(-L^2/(4t)), well inside e^(-L^2/(8t))
    assert 0 <= p - lead <= 3 * lead * math.exp(-L * L / (8 * t))


def test_tail_bound_covers_larger_cutoff():
    rng = np.random.default_rng(7)
    for _ in range(100):
        L, alpha, t = rng.uniform(0.5, 10), rng.uniform(0, 1), 10 ** rng.uniform(-2, 0.5)
        K = int(rng.integers(0, 15))
        small = S.heat_trace(S.circle_spectrum(L, alpha, K), t)
        exact = theta_oracle(L, alpha, t)
        # e^-x loses about x ulps to argument rounding, hence the relative slack
        assert -1e-13 * exact <= exact - small.value <= small.tail_bound * (1 + 1e-12) + 1e-13 * exact


def test_torus_tail_bound_covers_truncation():
    rng = np.random.default_rng(11)
    for _ in range(30):
        lengths = tuple(rng.uniform(0.5, 5, 2))
        alphas = tuple(rng.uniform(0, 1, 2))
        t = 10 ** rng.uniform(-1.5, 0)
        spec = S.torus_form_spectrum(lengths, alphas, 1, int(rng.integers(1, 6)))
        h = S.heat_trace(spec, t)
        exact = 2 * theta_oracle(lengths[0], alphas[0], t) * theta_oracle(lengths[1], alphas[1], t)
        assert -1e-13 * exact <= exact - h.value <= h.tail_bound * (1 + 1e-12) + 1e-13 * exact


@given(st.lists(st.floats(0.5, 5), min_size=2, max_size=3), st.data())
def test_torus_trace_is_product(lengths, data):
    d = len(lengths)
    alphas = [data.draw(st.floats(0, 0.999)) for _ in range(d)]
    p = data.draw(st.integers(0, d))
    t = data.draw(st.floats(0.05, 3))
    K = 6
    torus = S.heat_trace(S.torus_form_spectrum(lengths, alphas, p, K), t).value
    prod = math.comb(d, p) * math.prod(S.heat_trace(S.circle_spectrum(L, a, K), t).value for L, a in zip(lengths, alphas))
    assert torus == pytest.approx(prod, rel=1e-10)


@given(st.lists(st.tuples(st.floats(0, 50), st.integers(1, 5)), min_size=1, max_size=8))
def test_heat_trace_decreasing_and_log_convex(entries):
    spec = S.explicit_spectrum(entries)
    ts = np.linspace(0.05, 3, 40)
    vals = np.array([S.heat_trace(spec, float(t)).value for t in ts])
    assert np.all(np.diff(vals) <= 0)
    logs = np.log(vals[vals > 1e-250])
    assert np.all(np.diff(logs, 2) >= -1e-10)


# -- decay envelope


def test_envelope_single_mode_is_tight():
    rep = S.decay_envelope_check(S.explicit_spectrum([(2.0, 3)]), [1, 2, 5, 10])
    assert rep.passed
    assert max(abs(m) for m in rep.margins) <= 1e-15


def test_envelope_twisted_circle():
    rep = S.decay_envelope_check(S.circle_spectrum(TWO_PI, 0.5, 100), [1, 2, 5, 10, 50])
    assert rep.passed and rep.min_margin >= -1e-12


def test_envelope_rejects_kernel_and_early_times():
    with pytest.raises(HasKernel):
        S.decay_envelope_check(S.circle_spectrum(TWO_PI, 0.0, 10), [1, 2])
    with pytest.raises(InputError):
        S.decay_envelope_check(S.circle_spectrum(TWO_PI, 0.5, 10), [0.5, 2])


@given(st.lists(st.tuples(st.floats(0.01, 30), st.integers(1, 5)), min_size=1, max_size=8))
def test_envelope_holds_for_gapped_spectra(entries):
    rep = S.decay_envelope_check(S.explicit_spectrum(entries), np.linspace(1, 50, 50))
    assert rep.passed


# -- small-t expansion


def test_small_t_expansion_examples():
    e = S.small_t_expansion(S.circle_spectrum(TWO_PI, 0.3, 10))
    assert e.terms == ((-0.5, 0, pytest.approx(math.sqrt(math.pi))),)
    e = S.small_t_expansion(S.torus_form_spectrum((1.0, 1.0), (0.0, 0.0), 0, 3))
    assert e.coefficient(-1.0) == pytest.approx(1 / (4 * math.pi))
    e = S.small_t_expansion(S.torus_form_spectrum((1.0, 1.0), (0.0, 0.0), 1, 3))
    assert e.coefficient(-1.0) == pytest.approx(2 / (4 * math.pi))
    with pytest.raises(UnsupportedModel):
        S.small_t_expansion(S.explicit_spectrum([(1.0, 1)]))


def test_small_t_remainder_is_tiny():
    t = 0.01
    K = S.circle_cutoff(TWO_PI, 0.0, t)
    h = S.heat_trace(S.circle_spectrum(TWO_PI, 0.0, K), t)
    assert h.tail_bound <= 1e-13
    assert abs(h.value - math.sqrt(math.pi) * t**-0.5) <= 1e-10
