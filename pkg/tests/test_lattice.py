import cmath
from itertools import permutations

import numpy as np
import pytest

from conftest import draw
from oracles import dense_b_string, dense_B, dense_C, dense_c_string, dense_vector
from felderhof.lattice import (
    ModelParams,
    SectorError,
    apply_B,
    apply_C,
    b_string,
    c_matrix_element_brute,
    c_matrix_element_closed,
    c_string,
    dwbp_brute,
    frozen_decomposition,
    intermediate_sp_brute,
    r_matrix,
    r_weights,
    scalar_product_brute,
    wavefunction_V_brute,
    wavefunction_W_brute,
    wavefunctions_W,
    ybe_residual,
)
from felderhof.statespace import Configuration, SectorVector, configuration_state, sector_basis, vacuum
from felderhof.theta import ThetaParams, bracket, bracket_sqrt

TP = ThetaParams(0.1)

# independent high-precision value of the N = 2 domain-wall function at the point below
DWBP2_VALUE = 0.013663224192538008662
DWBP2_POINT = dict(p=0.013, h=0.21, vs=(0.31, 0.07), qs=(0.017, 0.011), u=(0.52, 0.18))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def test_weights_against_entries():
    u, v, p, q, h = 0.41, 0.12, 0.03, 0.02, 0.3
    w = r_weights(u, v, p, q, h, TP)
    s = lambda t: bracket_sqrt(t, TP)  # noqa: E731
    b = lambda t: bracket(t, TP)  # noqa: E731
    assert w.a_plus == b(u - v + p + q)
    assert w.a_minus == b(-u + v + p + q)
    den = s(h + 2 * p) * s(h + 2 * q)
    assert rel(w.b_plus, s(h) * s(h + 2 * p + 2 * q) / den * b(u - v + q - p)) < 1e-15
    assert rel(w.b_minus, s(h) * s(h + 2 * p + 2 * q) / den * b(u - v - q + p)) < 1e-15
    assert rel(w.c_plus, s(2 * p) * s(2 * q) / den * b(-u + v + p + q + h)) < 1e-15
    assert rel(w.c_minus, s(2 * p) * s(2 * q) / den * b(u - v + p + q + h)) < 1e-15


def test_ten_structural_zeros():
    R = r_matrix(0.41, 0.12, 0.03, 0.02, 0.3, TP)
    assert np.count_nonzero(R == 0) == 10
    assert set(zip(*np.nonzero(R))) == {(0, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 3)}


def test_weight_zeros():
    w = r_weights(0.5, 0.5 - 0.03 + 0.02, 0.02, 0.03, 0.3, TP)
    assert abs(w.b_minus) < 1e-15
    w = r_weights(0.5, 0.5 + 0.01, 0.02, 0.03, 0.3, TP)
    assert abs(w.b_plus) < 1e-15


def test_ybe_random(rng):
    for _ in range(30):
        u, v, w = rng.uniform(0, 0.8, 3)
        p, q, r = rng.uniform(0.01, 0.05, 3)
        h = rng.uniform(0.05, 0.5)
        assert ybe_residual(u, v, w, p, q, r, h, ThetaParams(rng.choice([0.05, 0.1, 0.2]))) < 1e-13


def test_ybe_coincident_spectral():
    assert ybe_residual(0.3, 0.3, 0.1, 0.02, 0.02, 0.04, 0.4, TP) < 1e-13


def test_single_site_operators():
    mp = ModelParams(TP, 0.02, 0.3, (0.2,), (0.03,))
    w = r_weights(0.55, 0.2, 0.02, 0.03, 0.3, TP)
    up = apply_B(0.55, 0.3, mp, vacuum(1))
    assert up.particle_count == 1 and up.amplitudes[0] == w.c_plus
    down = apply_C(0.55, 0.3, mp, configuration_state(Configuration(1, (1,))))
    assert down.particle_count == 0 and down.amplitudes[0] == w.c_minus


def test_sector_errors():
    mp, _, _ = draw(3, 1)
    with pytest.raises(SectorError):
        apply_C(0.1, 0.3, mp, vacuum(3))
    with pytest.raises(SectorError):
        apply_B(0.1, 0.3, mp, configuration_state(Configuration(3, (1, 2, 3))))
    with pytest.raises(SectorError):
        apply_B(0.1, 0.3, mp, vacuum(4))
    with pytest.raises(SectorError):
        b_string([0.1] * 4, 0.3, mp, vacuum(3))
    with pytest.raises(SectorError):
        c_string([0.1, 0.2], 0.3, mp, configuration_state(Configuration(3, (2,))))


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_B_and_C_against_dense(M, rng):
    mp, u, w = draw(M, 1, seed=M)
    h = mp.h
    for k in range(M + 1):
        basis = sector_basis(M, k)
        vec = SectorVector(basis, rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis)))
        dense = dense_vector(vec)
        if k < M:
            np.testing.assert_allclose(dense_vector(apply_B(u[0], h, mp, vec)), dense_B(u[0], h, mp) @ dense, atol=1e-14)
        if k > 0:
            np.testing.assert_allclose(dense_vector(apply_C(w[0], h, mp, vec)), dense_C(w[0], h, mp) @ dense, atol=1e-14)


def test_b_and_c_strings_against_dense():
    mp, u, w = draw(5, 3, seed=7)
    state = b_string(u, mp.h, mp, vacuum(5))
    ref = dense_b_string(u, mp.h, mp)
    np.testing.assert_allclose(dense_vector(state), ref, atol=1e-15)
    h2 = mp.h + 6 * mp.p
    np.testing.assert_allclose(dense_vector(c_string(w[:2], h2, mp, state)), dense_c_string(w[:2], h2, mp, ref), atol=1e-15)


def test_dense_monodromy_conserves_particles():
    mp, u, _ = draw(3, 1)
    B = dense_B(u[0], mp.h, mp)
    counts = np.array([bin(i).count("1") for i in range(8)])
    rows, cols = np.nonzero(np.abs(B) > 0)
    assert np.all(counts[rows] == counts[cols] + 1)


def test_dwbp_single_column():
    mp = ModelParams(TP, 0.02, 0.3, (0.2,), (0.03,))
    assert dwbp_brute([0.55], mp, 0.3) == r_weights(0.55, 0.2, 0.02, 0.03, 0.3, TP).c_plus


def test_dwbp_two_columns_frozen_value():
    pt = DWBP2_POINT
    mp = ModelParams(TP, pt["p"], pt["h"], pt["vs"], pt["qs"])
    val = dwbp_brute(list(pt["u"]), mp, pt["h"])
    assert abs(val - DWBP2_VALUE) < 1e-12 * abs(DWBP2_VALUE)


def test_dwbp_doubled_truncation():
    mp, u, _ = draw(3, 3, seed=3)
    a = dwbp_brute(u, mp, mp.h)
    b = dwbp_brute(u, mp.with_theta(mp.theta.doubled()), mp.h)
    assert rel(a, b) < 1e-15


def test_scalar_product_two_sites_by_hand():
    mp, u, w = draw(2, 1, seed=11)
    (u,), (w,) = u, w
    p, h = mp.p, mp.h
    h2 = h + 2 * mp.qs[0]

    def R(x, j, hh):
        return r_weights(x, mp.vs[j], p, mp.qs[j], hh, TP)

    expected = (
        R(u, 0, h).c_plus * R(u, 1, h2).b_minus * R(w, 0, h + 2 * p).c_minus * R(w, 1, h2 + 2 * p).a_plus
        + R(u, 0, h).a_plus * R(u, 1, h2).c_plus * R(w, 0, h + 2 * p).b_minus * R(w, 1, h2 + 2 * p).c_minus
    )
    assert rel(scalar_product_brute([u], [w], mp, h), expected) < 1e-14


def test_empty_scalar_product_is_one():
    mp, _, _ = draw(3, 0)
    assert scalar_product_brute([], [], mp, mp.h) == 1


def test_intermediate_top_is_scalar_product():
    mp, u, w = draw(4, 2, seed=2)
    assert intermediate_sp_brute(u, w, 2, mp, mp.h) == scalar_product_brute(u, w, mp, mp.h)


@pytest.mark.parametrize("M,N", [(3, 1), (4, 2), (5, 3)])
def test_intermediate_bottom_freezes(M, N):
    mp, u, _ = draw(M, N, seed=M)
    assert rel(intermediate_sp_brute(u, [], 0, mp, mp.h), frozen_decomposition(u, mp, mp.h)) < 1e-13


@pytest.mark.parametrize("M,N", [(3, 2), (4, 2), (5, 3)])
def test_completeness_decomposition(M, N):
    # C-string on the left of a B-string: scalar product equals sum over configurations of V * W
    mp, u, w = draw(M, N, seed=N)
    h = mp.h
    total = sum(
        wavefunction_V_brute(w, c, mp, h + 2 * N * mp.p) * wavefunction_W_brute(u, c, mp, h)
        for c in sector_basis(M, N).configs
    )
    assert rel(total, scalar_product_brute(u, w, mp, h)) < 1e-13


def test_wavefunction_W_vector_consistent():
    mp, u, _ = draw(4, 2, seed=5)
    vec = wavefunctions_W(u, mp, mp.h)
    for c in sector_basis(4, 2).configs:
        assert wavefunction_W_brute(u, c, mp, mp.h) == vec.amplitude(c)


def test_wavefunction_W_exchange(rng):
    # W divided by prod_{j<k} [u_j - u_k + 2p] is symmetric in the u's
    mp, u, _ = draw(5, 3, seed=9)
    c = Configuration(5, (1, 3, 4))

    def reduced(us):
        den = 1.0
        for j in range(3):
            for k in range(j + 1, 3):
                den *= bracket(us[j] - us[k] + 2 * mp.p, TP)
        return wavefunction_W_brute(list(us), c, mp, mp.h) / den

    base = reduced(u)
    for perm in permutations(u):
        assert rel(reduced(perm), base) < 1e-10


@pytest.mark.parametrize("M,N,n", [(3, 2, 1), (4, 2, 1), (4, 3, 2), (5, 3, 1), (5, 3, 3)])
def test_c_element_closed_form(M, N, n):
    mp, _, w = draw(M, N, seed=M + n)
    for k in range(1, M - N + n + 1):
        a = c_matrix_element_brute(k, w[0], n, N, mp, mp.h)
        b = c_matrix_element_closed(k, w[0], n, N, mp, mp.h)
        assert rel(a, b) < 1e-13


def test_c_element_vanishes_at_tail_zero():
    mp, _, _ = draw(4, 2, seed=1)
    j = 4  # a site beyond L = M - N + n for n = 1
    w = mp.vs[j - 1] - mp.qs[j - 1] + mp.p
    assert abs(c_matrix_element_brute(1, w, 1, 2, mp, mp.h)) < 1e-15


def test_c_element_index_checks():
    mp, _, _ = draw(4, 2)
    with pytest.raises(ValueError):
        c_matrix_element_brute(4, 0.1, 1, 2, mp, mp.h)
    with pytest.raises(ValueError):
        c_matrix_element_closed(1, 0.1, 0, 2, mp, mp.h)


def test_model_param_helpers():
    mp, _, _ = draw(4, 2)
    assert mp.qbar[0] == 0 and abs(mp.qbar[4] - sum(mp.qs)) < 1e-15
    assert mp.head(2).vs == mp.vs[:2]
    assert mp.tail(3).qs == mp.qs[2:]
    assert mp.with_v(2, 0.5).vs[1] == 0.5
    assert cmath.isclose(mp.site_height(mp.h, 3), mp.h + 2 * (mp.qs[0] + mp.qs[1]))


def test_wavefunction_W_exchange_over_inversions():
    # reordering the B's multiplies W by one ratio of shifted brackets per inversion
    from felderhof.closedforms import inversions

    mp, u, _ = draw(5, 3, seed=9)
    c = Configuration(5, (2, 3, 5))
    base = wavefunction_W_brute(u, c, mp, mp.h)
    for sigma in permutations(range(3)):
        us = [u[i] for i in sigma]
        left = right = 1.0
        for j, k in inversions(sigma):
            left *= bracket(us[k] - us[j] + 2 * mp.p, TP)
            right *= bracket(us[j] - us[k] + 2 * mp.p, TP)
        assert rel(left * wavefunction_W_brute(us, c, mp, mp.h), right * base) < 1e-10
