import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from felderhof.theta import (
    BranchCutWarning,
    DegenerateInputError,
    EllipticPolySpec,
    ThetaParams,
    bracket,
    bracket_sqrt,
    default_n_max,
    quasi_period_residual,
    theta_H,
    theta_series,
)

# independent high-precision values: i * jtheta1(pi t, q) / q^(1/4)
BRACKET_037_Q01 = 1.8422831017899480434j
BRACKET_037_Q02 = 1.8625501663368750067j

reals = st.floats(-1.0, 1.0, allow_nan=False)
nomes = st.sampled_from([0.05, 0.1, 0.2, 0.3])


def test_truncation_policy():
    assert default_n_max(0.1) == 10
    assert default_n_max(0.2) == 13
    assert default_n_max(0.9) == 64
    tp = ThetaParams(0.1)
    assert tp.certified
    assert tp.nome ** (2 * tp.n_max) < tp.trunc_tol
    assert tp.tau.real == 0 and tp.tau.imag > 0


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
def test_nome_out_of_range(bad):
    with pytest.raises(ValueError):
        ThetaParams(bad)


def test_H_zero_and_small_nome_limit():
    assert theta_H(0.0, ThetaParams(0.3)) == 0
    u = 0.4 - 0.25j
    assert abs(theta_H(u, ThetaParams(1e-9)) - 2 * cmath.sinh(u)) < 1e-15


def test_non_finite_argument_rejected():
    with pytest.raises(ValueError):
        theta_H(complex(math.inf, 0), ThetaParams(0.1))
    with pytest.raises(ValueError):
        theta_H(np.array([0.1, np.nan]), ThetaParams(0.1))


def test_doubled_truncation_agrees():
    tp = ThetaParams(0.1)
    a = theta_H(0.3 + 0.2j, tp)
    b = theta_H(0.3 + 0.2j, tp.with_n_max(tp.n_max + 16))
    assert abs(a - b) / abs(b) < 1e-15


def test_vectorised_matches_scalar():
    tp = ThetaParams(0.2)
    t = np.array([0.1, 0.37 + 0.2j, -0.6])
    np.testing.assert_allclose(bracket(t, tp), [bracket(x, tp) for x in t], rtol=1e-14)


def test_golden_bracket_values():
    assert abs(bracket(0.37, ThetaParams(0.1)) - BRACKET_037_Q01) < 1e-15
    assert abs(bracket(0.37, ThetaParams(0.2)) - BRACKET_037_Q02) < 1e-15


@settings(max_examples=60, deadline=None)
@given(reals, reals, nomes)
def test_series_oracle(x, y, q):
    t = complex(x, 0.3 * y)
    tp = ThetaParams(q)
    assert abs(bracket(t, tp) - theta_series(t, q)) <= 1e-13 * max(1.0, abs(theta_series(t, q)))


@settings(max_examples=60, deadline=None)
@given(reals, reals, nomes)
def test_odd(x, y, q):
    tp = ThetaParams(q)
    t = complex(x, y * 0.5)
    assert abs(bracket(-t, tp) + bracket(t, tp)) <= 1e-15 * max(1.0, abs(bracket(t, tp)))


@settings(max_examples=80, deadline=None)
@given(reals, reals, nomes)
def test_quasi_periods(x, y, q):
    tp = ThetaParams(q)
    t = complex(x, y * tp.tau.imag * 0.5)
    val = bracket(t, tp)
    if min(abs(x), 1 - abs(x)) < 0.02:
        return  # relative residual is meaningless next to a zero
    assert abs(bracket(t + 1, tp) + val) / abs(val) < 1e-12
    pred = -cmath.exp(-2j * math.pi * t) / q * val
    assert abs(bracket(t + tp.tau, tp) - pred) / abs(pred) < 1e-12


def test_truncation_monotone():
    tp = ThetaParams(0.2)
    for t in [0.1, 0.45 + 0.3j, -0.8 + 0.1j]:
        a, b = bracket(t, tp), bracket(t, tp.doubled())
        assert abs(a - b) / abs(b) < tp.trunc_tol


def test_sqrt_on_safe_domain(rng):
    tp = ThetaParams(0.1)
    for t in rng.uniform(0.0, 1.0, 50):
        r = bracket_sqrt(t, tp)
        assert abs(r * r - bracket(t, tp)) < 1e-15 * abs(bracket(t, tp)) + 1e-300
        assert abs(cmath.phase(r) - math.pi / 4) < 1e-14


def test_sqrt_multiplicative_on_safe_domain(rng):
    tp = ThetaParams(0.1)
    for a, b in rng.uniform(0.02, 0.98, (30, 2)):
        lhs = bracket_sqrt(a, tp) * bracket_sqrt(b, tp)
        rhs = 1j * cmath.sqrt(-bracket(a, tp) * bracket(b, tp))
        assert abs(lhs - rhs) < 1e-14 * abs(rhs)


def test_sqrt_ratio_branch_stable():
    # a ratio of half powers deformed continuously across the safe domain has no jumps
    tp = ThetaParams(0.1)
    h = np.linspace(0.03, 0.6, 400)
    vals = np.array([bracket_sqrt(x, tp) * bracket_sqrt(x + 0.3, tp) / bracket_sqrt(x + 0.1, tp) for x in h])
    assert np.max(np.abs(np.diff(np.angle(vals)))) < 1e-12


def test_branch_cut_warning():
    tp = ThetaParams(0.1)
    assert bracket(0.3j, tp).real < 0
    with pytest.warns(BranchCutWarning):
        bracket_sqrt(0.3j, tp)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bracket_sqrt(0.3, tp)


def test_elliptic_polynomial_data_validated():
    with pytest.raises(ValueError):
        EllipticPolySpec(0, 1, 1)
    with pytest.raises(ValueError):
        EllipticPolySpec(1, 0, 1)
    with pytest.raises(ValueError):
        EllipticPolySpec(2, 1, 0)


def test_bracket_is_degree_one(rng):
    tp = ThetaParams(0.1)
    spec = EllipticPolySpec.from_shift_constant(1, -1, 0.0)
    assert abs(spec.chi_tau + 1) < 1e-15
    ys = rng.uniform(0, 1, 10) + 0.1j * rng.uniform(-1, 1, 10)
    assert quasi_period_residual(lambda y: bracket(y, tp), spec, tp, ys) < 1e-12


def test_product_of_two_brackets(rng):
    tp = ThetaParams(0.2)
    a, b = 0.31, -0.47
    spec = EllipticPolySpec.from_shift_constant(2, 1, -(a + b))
    assert abs(spec.alpha - 2j * math.pi * (a + b)) < 1e-15
    f = lambda y: bracket(y - a, tp) * bracket(y - b, tp)  # noqa: E731
    assert quasi_period_residual(f, spec, tp, rng.uniform(-1, 1, 12)) < 1e-11
    wrong = EllipticPolySpec.from_shift_constant(2, 1, a + b)
    assert quasi_period_residual(f, wrong, tp, rng.uniform(-1, 1, 12)) > 1e-3


def test_near_zero_samples_skipped():
    tp = ThetaParams(0.1)
    spec = EllipticPolySpec.from_shift_constant(1, -1, 0.0)
    res, skipped = quasi_period_residual(lambda y: bracket(y, tp), spec, tp, [0.0, 0.3, 0.6], return_skipped=True)
    assert skipped == 1 and res < 1e-12
    with pytest.raises(DegenerateInputError):
        quasi_period_residual(lambda y: 0.0, spec, tp, [0.1, 0.2])
