"""Closed-form expressions for the elliptic Felderhof partition functions.

Everything here is an explicit product or a small determinant of theta
brackets.  Spectral parameters that coincide make the Cauchy-type prefactors
singular; such inputs raise :class:`SingularInputError` instead of returning
inf/nan.  Limits are the caller's business.

Conventions: sites and particles are 1-based in docstrings, 0-based in code;
``mp.qbar[j]`` is q_1 + ... + q_j with ``qbar[0] = 0``.
"""

from __future__ import annotations

from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .lattice import ModelParams
from .statespace import Configuration
from .theta import EllipticPolySpec, bracket, bracket_sqrt


class SingularInputError(ZeroDivisionError):
    pass


SINGULAR_TOL = 1e-300


def _b(mp: ModelParams):
    tp = mp.theta
    return lambda t: bracket(t, tp)


def _s(mp: ModelParams):
    tp = mp.theta
    return lambda t: bracket_sqrt(t, tp)


def _den(x: complex, what: str = "denominator") -> complex:
    if abs(x) < SINGULAR_TOL:
        raise SingularInputError(f"{what} vanishes")
    return x


def det(matrix: np.ndarray) -> complex:
    """Determinant via LAPACK's partially pivoted LU; 0x0 gives 1."""
    m = np.asarray(matrix, dtype=complex)
    if m.size == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(m))


def a_eval(u, mp: ModelParams, sites: Sequence[int] | None = None) -> complex:
    """a(u) = prod_l [u - v_l + p + q_l] over ``sites`` (1-based; default all)."""
    b = _b(mp)
    idx = range(1, mp.M + 1) if sites is None else sites
    val = 1.0 + 0j
    for l in idx:
        val *= b(u - mp.vs[l - 1] + mp.p + mp.qs[l - 1])
    return val


def d_eval(u, mp: ModelParams, sites: Sequence[int] | None = None) -> complex:
    """d(u) = prod_l [u - v_l + p - q_l] over ``sites`` (1-based; default all)."""
    b = _b(mp)
    idx = range(1, mp.M + 1) if sites is None else sites
    val = 1.0 + 0j
    for l in idx:
        val *= b(u - mp.vs[l - 1] + mp.p - mp.qs[l - 1])
    return val


def _pair_product(xs: Sequence[complex], f: Callable[[complex, complex], complex]) -> complex:
    val = 1.0 + 0j
    for j in range(len(xs)):
        for k in range(j + 1, len(xs)):
            val *= f(xs[j], xs[k])
    return val


def deformed_vandermonde(xs: Sequence[complex], shift: complex, mp: ModelParams) -> complex:
    """prod_{j<k} [x_j - x_k + shift]."""
    b = _b(mp)
    return _pair_product(xs, lambda x, y: b(x - y + shift))


def vandermonde(xs: Sequence[complex], mp: ModelParams) -> complex:
    b = _b(mp)
    return _den(_pair_product(xs, lambda x, y: b(x - y)), "elliptic Vandermonde (coincident spectral parameters)")


# --------------------------------------------------------------------------
# domain-wall boundary


def dwbp_factorized(u_list: Sequence[complex], mp: ModelParams, h) -> complex:
    """Factorized domain-wall partition function of an N x N lattice."""
    N = len(u_list)
    if mp.M != N:
        raise ValueError(f"domain-wall boundary needs M = N, got M={mp.M}, N={N}")
    b, s = _b(mp), _s(mp)
    p = mp.p
    qsum = mp.qbar[N]
    num = b(h + sum(mp.vs) - sum(u_list) + N * p + qsum)
    val = num / (_den(s(h + 2 * qsum)) * _den(s(h + 2 * N * p)))
    for j in range(N):
        val *= s(2 * p) * s(2 * mp.qs[j])
    val *= deformed_vandermonde(u_list, 2 * p, mp)
    for j in range(N):
        for k in range(j + 1, N):
            val *= b(mp.vs[k] - mp.vs[j] + mp.qs[j] + mp.qs[k])
    return val


def dwbp_factor_arguments(u_list: Sequence[float], mp: ModelParams, h) -> list:
    """Arguments of the full-power brackets in the factorized domain-wall form.

    The function vanishes exactly when one of them is a lattice point, so a
    sampler can use these to stay away from its zeros.
    """
    N = len(u_list)
    p = mp.p
    args = [h + sum(mp.vs) - sum(u_list) + N * p + mp.qbar[N]]
    args += [u_list[j] - u_list[k] + 2 * p for j in range(N) for k in range(j + 1, N)]
    args += [mp.vs[k] - mp.vs[j] + mp.qs[j] + mp.qs[k] for j in range(N) for k in range(j + 1, N)]
    return args


# --------------------------------------------------------------------------
# scalar products


def scalar_kernel(w, u, mp: ModelParams, h, N: int, sites: int | None = None) -> complex:
    """Divided-difference kernel of the scalar-product determinant.

    ``sites`` restricts a, d and the qbar shift to the first ``sites`` columns
    (default: all M), which is the form needed for intermediate products.
    """
    b = _b(mp)
    L = mp.M if sites is None else sites
    idx = range(1, L + 1)
    H = h + 2 * N * mp.p
    QL = mp.qbar[L]
    first = b(w + H - u) / _den(b(H)) * a_eval(w, mp, idx) * d_eval(u, mp, idx)
    second = b(w + H - u + 2 * QL) / _den(b(H + 2 * QL)) * a_eval(u, mp, idx) * d_eval(w, mp, idx)
    return (first - second) / _den(b(u - w), "[u_k - w_j]")


def scalar_product_det(u_list, w_list, mp: ModelParams, h) -> complex:
    """Determinant formula for the scalar product <Omega| C...C B...B |Omega>."""
    N = len(u_list)
    if len(w_list) != N:
        raise ValueError("scalar product needs as many w's as u's")
    b, s = _b(mp), _s(mp)
    p = mp.p
    Q = mp.qbar[mp.M]
    pre = b(2 * p) ** N
    pre *= s(h + 2 * N * p) * s(h + 2 * N * p + 2 * Q) / (_den(s(h + 4 * N * p)) * _den(s(h + 2 * Q)))
    pre *= deformed_vandermonde(u_list, 2 * p, mp) * deformed_vandermonde(w_list, -2 * p, mp)
    pre /= vandermonde(u_list, mp) * vandermonde(w_list, mp)
    K = np.array([[scalar_kernel(w, u, mp, h, N) for u in u_list] for w in w_list])
    return pre * det(K)


# --------------------------------------------------------------------------
# intermediate scalar products


def intermediate_prefactor_D(M: int, N: int, n: int, mp: ModelParams, h) -> complex:
    """Prefactor D_{M,N,n} in its compact form."""
    _check_mnn(M, N, n, mp)
    s = _s(mp)
    p = mp.p
    Q = mp.qbar[M]
    val = s(2 * p) ** (N + n)
    for j in range(n + 1, N + 1):
        val *= s(2 * mp.qs[M - N + j - 1])
    val *= s(h + 2 * N * p) * s(h + 2 * N * p + 2 * Q) * s(h + 2 * (N + n) * p + 2 * Q)
    val /= _den(s(h + 2 * Q) * s(h + 2 * (N + n) * p) * s(h + 2 * (N + n) * p + 2 * mp.qbar[M - N + n]))
    return val


def intermediate_prefactor_D_ladder(M: int, N: int, n: int, mp: ModelParams, h) -> complex:
    """D_{M,N,n} written as the n = 0 prefactor times one ratio per C-operator."""
    _check_mnn(M, N, n, mp)
    b, s = _b(mp), _s(mp)
    p = mp.p
    Q = mp.qbar[M]
    qb = mp.qbar
    val = b(h + 2 * N * p + 2 * Q) / _den(s(h + 2 * Q) * s(h + 2 * qb[M - N] + 2 * N * p))
    for j in range(1, N + 1):
        val *= s(2 * p) * s(2 * mp.qs[M - N + j - 1])
    for j in range(1, n + 1):
        val *= s(2 * p) / _den(s(2 * mp.qs[M - N + j - 1]))
        val *= s(h + 2 * (N + j - 1) * p) * s(h + 2 * (N + j - 1) * p + 2 * qb[M - N + j - 1]) * s(h + 2 * (N + j) * p + 2 * Q)
        val /= _den(s(h + 2 * (N + j) * p) * s(h + 2 * (N + j - 1) * p + 2 * Q) * s(h + 2 * (N + j) * p + 2 * qb[M - N + j]))
    return val


def _check_mnn(M: int, N: int, n: int, mp: ModelParams) -> None:
    if M != mp.M:
        raise ValueError(f"M={M} does not match the {mp.M}-site model")
    if not (0 <= n <= N <= M):
        raise ValueError(f"need 0 <= n <= N <= M, got n={n}, N={N}, M={M}")


def intermediate_kernel_P(j: int, k: int, u_list, w_list, M: int, N: int, n: int, mp: ModelParams, h,
                          *, literal: bool = False) -> complex:
    """Entry (j, k) of the N x N matrix of the intermediate determinant (1-based).

    Rows j <= n carry w_j; rows j > n are frozen rows attached to site M-N+j.
    With ``literal=False`` (default) the top rows use a, d and qbar restricted
    to the first L = M-N+n sites and carry d over the remaining sites in u_k;
    this is the form that matches the lattice for every n.  ``literal=True``
    keeps the full-lattice a, d in the top rows, which agrees only at n = 0
    and n = N.
    """
    _check_mnn(M, N, n, mp)
    if not (1 <= j <= N and 1 <= k <= N):
        raise IndexError(f"matrix index ({j}, {k}) outside 1..{N}")
    b = _b(mp)
    p = mp.p
    u = u_list[k - 1]
    L = M - N + n
    if j <= n:
        w = w_list[j - 1]
        frozen = 1.0 + 0j
        for l in range(L + 1, M + 1):
            frozen *= b(w - mp.vs[l - 1] - p + mp.qs[l - 1])
        if literal:
            return frozen * scalar_kernel(w, u, mp, h, N)
        return frozen * d_eval(u, mp, range(L + 1, M + 1)) * scalar_kernel(w, u, mp, h, N, sites=L)
    m = M - N + j
    Q = mp.qbar[M]
    val = b(h + (2 * N - 1) * p + 2 * Q - mp.qs[m - 1] + mp.vs[m - 1] - u) / _den(b(h + 2 * N * p + 2 * Q))
    for l in range(1, M + 1):
        if l != m:
            val *= b(u - mp.vs[l - 1] + p + mp.qs[l - 1])
    return val


def intermediate_sp_det(u_list, w_list, M: int, N: int, n: int, mp: ModelParams, h,
                        *, literal: bool = False, general: bool = False) -> complex:
    """Determinant form of the intermediate scalar product Q_{M,N,n}.

    At n = N this dispatches to :func:`scalar_product_det` so both paths return
    identical floats; pass ``general=True`` to force the n-generic formula.
    """
    _check_mnn(M, N, n, mp)
    if len(u_list) != N or len(w_list) != n:
        raise ValueError("need N u's and n w's")
    if n == N and not general and not literal:
        return scalar_product_det(u_list, w_list, mp, h)
    b = _b(mp)
    p = mp.p
    val = intermediate_prefactor_D(M, N, n, mp, h)
    val *= deformed_vandermonde(u_list, 2 * p, mp) / vandermonde(u_list, mp)
    for j in range(M - N + n + 1, M + 1):
        for k in range(j + 1, M + 1):
            vj, vk, qj, qk = mp.vs[j - 1], mp.vs[k - 1], mp.qs[j - 1], mp.qs[k - 1]
            val *= b(vk - vj + qj + qk) / _den(b(vk - vj + qj - qk))
    val *= deformed_vandermonde(w_list, -2 * p, mp) / vandermonde(w_list, mp)
    P = np.array(
        [[intermediate_kernel_P(j, k, u_list, w_list, M, N, n, mp, h, literal=literal) for k in range(1, N + 1)]
         for j in range(1, N + 1)]
    )
    return val * det(P)


def q0_factorized(u_list, mp: ModelParams, h) -> complex:
    """n = 0 intermediate product as frozen block times the shifted domain-wall product."""
    N = len(u_list)
    M = mp.M
    if N > M:
        raise ValueError(f"N={N} exceeds M={M}")
    b, s = _b(mp), _s(mp)
    p = mp.p
    qb = mp.qbar
    tail = range(M - N + 1, M + 1)
    val = 1.0 + 0j
    for u in u_list:
        for k in range(1, M - N + 1):
            val *= b(u - mp.vs[k - 1] + p + mp.qs[k - 1])
    vsum = sum(mp.vs[j - 1] for j in tail)
    qsum = sum(mp.qs[j - 1] for j in tail)
    val *= b(h + 2 * qb[M - N] + vsum - sum(u_list) + N * p + qsum)
    val /= _den(s(h + 2 * qb[M]) * s(h + 2 * qb[M - N] + 2 * N * p))
    for j in tail:
        val *= s(2 * p) * s(2 * mp.qs[j - 1])
    val *= deformed_vandermonde(u_list, 2 * p, mp)
    for j in tail:
        for k in range(j + 1, M + 1):
            val *= b(mp.vs[k - 1] - mp.vs[j - 1] + mp.qs[j - 1] + mp.qs[k - 1])
    return val


def q0_det(u_list, mp: ModelParams, h) -> complex:
    """n = 0 intermediate product rewritten as a Cauchy-type determinant."""
    N = len(u_list)
    M = mp.M
    if N > M:
        raise ValueError(f"N={N} exceeds M={M}")
    b, s = _b(mp), _s(mp)
    p = mp.p
    qb = mp.qbar
    Q = qb[M]
    val = b(h + 2 * N * p + 2 * Q) / _den(s(h + 2 * Q) * s(h + 2 * qb[M - N] + 2 * N * p))
    val *= deformed_vandermonde(u_list, 2 * p, mp) / vandermonde(u_list, mp)
    for j in range(M - N + 1, M + 1):
        for k in range(j + 1, M + 1):
            vj, vk, qj, qk = mp.vs[j - 1], mp.vs[k - 1], mp.qs[j - 1], mp.qs[k - 1]
            val *= b(vk - vj + qj + qk) / _den(b(vk - vj + qj - qk))
    for u in u_list:
        val *= a_eval(u, mp)
    val *= s(2 * p) ** N
    for j in range(M - N + 1, M + 1):
        val *= s(2 * mp.qs[j - 1])
    cols = [(mp.vs[m - 1], mp.qs[m - 1]) for m in range(M - N + 1, M + 1)]
    den_h = _den(b(h + 2 * N * p + 2 * Q))
    A = np.array(
        [[b(h + (2 * N - 1) * p + 2 * Q - q + v - u) / (den_h * _den(b(u + p - v + q))) for v, q in cols] for u in u_list]
    )
    return val * det(A)


# --------------------------------------------------------------------------
# Frobenius determinant


def frobenius_lhs(lam, z_list, w_list, mp: ModelParams) -> complex:
    b = _b(mp)
    bl = _den(b(lam), "[lambda]")
    A = np.array([[b(lam + z - w) / (bl * _den(b(z - w))) for w in w_list] for z in z_list])
    return det(A)


def frobenius_rhs(lam, z_list, w_list, mp: ModelParams) -> complex:
    b = _b(mp)
    num = b(lam + sum(z_list) - sum(w_list))
    num *= _pair_product(z_list, lambda x, y: b(x - y)) * _pair_product(w_list, lambda x, y: b(y - x))
    den = b(lam)
    for z in z_list:
        for w in w_list:
            den *= b(z - w)
    return num / _den(den)


# --------------------------------------------------------------------------
# elliptic Schur functions


def _check_config(c: Configuration, n_vars: int, mp: ModelParams) -> None:
    if c.m_sites != mp.M:
        raise ValueError(f"configuration on {c.m_sites} sites, model has {mp.M}")
    if c.n_particles != n_vars:
        raise ValueError(f"{n_vars} variables for a {c.n_particles}-particle configuration")


def _s_row_weight(x: int, j: int, N: int, mp: ModelParams, h) -> complex:
    s = _s(mp)
    p, Q, qb = mp.p, mp.qbar[mp.M], mp.qbar
    num = s(h + 2 * j * p + 2 * Q) * s(2 * p) * s(2 * mp.qs[x - 1])
    den = s(h + 2 * (j - 1) * p + 2 * Q) * s(h + 2 * N * p + 2 * qb[x - 1]) * s(h + 2 * N * p + 2 * qb[x])
    return num / _den(den)


def _t_row_weight(x: int, j: int, mp: ModelParams, h) -> complex:
    s = _s(mp)
    p, qb = mp.p, mp.qbar
    num = s(h + 2 * (j - 1) * p) * s(2 * p) * s(2 * mp.qs[x - 1])
    den = s(h + 2 * j * p) * s(h + 2 * qb[x - 1]) * s(h + 2 * qb[x])
    return num / _den(den)


def schur_f(x: int, j: int, u, N: int, mp: ModelParams, h) -> complex:
    """Row function of the S determinant for particle j at site x."""
    b = _b(mp)
    p, qb = mp.p, mp.qbar
    val = _s_row_weight(x, j, N, mp, h)
    val *= b(-u + mp.vs[x - 1] + h + (2 * N - 1) * p + mp.qs[x - 1] + 2 * qb[x - 1])
    val *= a_eval(u, mp, range(1, x)) * d_eval(u, mp, range(x + 1, mp.M + 1))
    return val


def schur_h(x: int, j: int, u, mp: ModelParams, h) -> complex:
    """Row function of the T determinant for particle j at site x."""
    b = _b(mp)
    p, qb = mp.p, mp.qbar
    val = _t_row_weight(x, j, mp, h)
    val *= b(u - mp.vs[x - 1] + h + p + mp.qs[x - 1] + 2 * qb[x - 1])
    val *= d_eval(u, mp, range(1, x)) * a_eval(u, mp, range(x + 1, mp.M + 1))
    return val


def schur_S_det(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    _check_config(c, len(u_list), mp)
    N = len(u_list)
    F = np.array([[schur_f(x, j, u, N, mp, h) for u in u_list] for j, x in enumerate(c.positions, start=1)])
    return det(F) / vandermonde(u_list, mp)


def schur_T_det(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    _check_config(c, len(u_list), mp)
    Hm = np.array([[schur_h(x, j, u, mp, h) for u in u_list] for j, x in enumerate(c.positions, start=1)])
    return det(Hm) / vandermonde(u_list, mp)


def schur_S_sum(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    """S as a sum over permutations assigning variables to particles."""
    _check_config(c, len(u_list), mp)
    b = _b(mp)
    N, M = len(u_list), mp.M
    p, qb = mp.p, mp.qbar
    xs = c.positions
    weight = 1.0 + 0j
    for j, x in enumerate(xs, start=1):
        weight *= _s_row_weight(x, j, N, mp, h)
    total = 0j
    for sigma in permutations(range(N)):
        us = [u_list[i] for i in sigma]
        term = 1.0 / vandermonde(us, mp)
        for j, x in enumerate(xs):
            u = us[j]
            for k in range(x + 1, M + 1):
                term *= b(u - mp.vs[k - 1] - mp.qs[k - 1] + p)
            term *= b(-u + mp.vs[x - 1] + h + (2 * N - 1) * p + mp.qs[x - 1] + 2 * qb[x - 1])
            for k in range(1, x):
                term *= b(u - mp.vs[k - 1] + p + mp.qs[k - 1])
        total += term
    return weight * total


def schur_T_sum(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    """T as a sum over permutations assigning variables to particles."""
    _check_config(c, len(u_list), mp)
    b = _b(mp)
    N, M = len(u_list), mp.M
    p, qb = mp.p, mp.qbar
    xs = c.positions
    weight = 1.0 + 0j
    for j, x in enumerate(xs, start=1):
        weight *= _t_row_weight(x, j, mp, h)
    total = 0j
    for sigma in permutations(range(N)):
        us = [u_list[i] for i in sigma]
        term = 1.0 / vandermonde(us, mp)
        for j, x in enumerate(xs):
            u = us[j]
            for k in range(x + 1, M + 1):
                term *= b(u - mp.vs[k - 1] + mp.qs[k - 1] + p)
            term *= b(u - mp.vs[x - 1] + h + p + mp.qs[x - 1] + 2 * qb[x - 1])
            for k in range(1, x):
                term *= b(u - mp.vs[k - 1] + p - mp.qs[k - 1])
        total += term
    return weight * total


def all_configurations(M: int, N: int):
    from .statespace import sector_basis

    return sector_basis(M, N).configs


def cauchy_lhs(u_list, w_list, M: int, mp: ModelParams, h) -> complex:
    """sum_c S(u; c; h) T(w; c; h + 2Np)."""
    N = len(u_list)
    if M != mp.M or len(w_list) != N or N > M:
        raise ValueError("inconsistent sizes for the Cauchy sum")
    hT = h + 2 * N * mp.p
    return sum(schur_S_det(u_list, c, mp, h) * schur_T_det(w_list, c, mp, hT) for c in all_configurations(M, N))


def cauchy_rhs(u_list, w_list, M: int, mp: ModelParams, h) -> complex:
    """Determinant side of the Cauchy identity."""
    N = len(u_list)
    if M != mp.M or len(w_list) != N or N > M:
        raise ValueError("inconsistent sizes for the Cauchy sum")
    b, s = _b(mp), _s(mp)
    p = mp.p
    Q = mp.qbar[M]
    pre = b(2 * p) ** N
    pre *= s(h + 2 * N * p) * s(h + 2 * N * p + 2 * Q) / (_den(s(h + 4 * N * p)) * _den(s(h + 2 * Q)))
    pre /= vandermonde(u_list, mp) * vandermonde(w_list, mp)
    K = np.array([[scalar_kernel(w, u, mp, h, N) for u in u_list] for w in w_list])
    return pre * det(K)


# --------------------------------------------------------------------------
# recursions, factorizations and quasi-periodicity data


def rel_residual(lhs: complex, rhs: complex) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale


def recursion_point(M: int, N: int, n: int, mp: ModelParams) -> complex:
    """w_n value at which the last C-operator freezes onto site M-N+n."""
    L = M - N + n
    return mp.vs[L - 1] - mp.p - mp.qs[L - 1]


def recursion_factor_intermediate(M: int, N: int, n: int, mp: ModelParams, h) -> complex:
    b, s = _b(mp), _s(mp)
    p, qb = mp.p, mp.qbar
    L = M - N + n
    Q = qb[M]
    val = s(2 * p) * s(2 * mp.qs[L - 1])
    val *= s(h + 2 * (N + n - 1) * p) * s(h + 2 * (N + n - 1) * p + 2 * qb[L - 1]) * s(h + 2 * (N + n) * p + 2 * Q)
    val /= _den(s(h + 2 * (N + n) * p) * s(h + 2 * (N + n) * p + 2 * qb[L]) * s(h + 2 * (N + n - 1) * p + 2 * Q))
    x = mp.vs[L - 1] - mp.qs[L - 1]
    for j in range(1, L):
        val *= b(x - mp.vs[j - 1] - mp.qs[j - 1])
    for j in range(L + 1, M + 1):
        val *= b(x - mp.vs[j - 1] + mp.qs[j - 1] - 2 * p)
    return val


def recursion_residual_intermediate(u_list, w_list, M: int, N: int, n: int, mp: ModelParams, h,
                                    evaluator: Callable | None = None) -> float:
    """Relative gap in the n -> n-1 reduction at the freezing value of w_n.

    ``evaluator(u_list, w_list, n)`` defaults to the determinant formula; pass a
    brute-force evaluator to check the lattice itself.  ``w_list[n-1]`` is
    overwritten by the freezing point.
    """
    if n < 1:
        raise ValueError("recursion needs n >= 1")
    _check_mnn(M, N, n, mp)
    if evaluator is None:
        def evaluator(us, ws, m):
            return intermediate_sp_det(us, ws, M, N, m, mp, h)
    ws = list(w_list[:n])
    ws[n - 1] = recursion_point(M, N, n, mp)
    lhs = evaluator(u_list, ws, n)
    rhs = recursion_factor_intermediate(M, N, n, mp, h) * evaluator(u_list, ws[: n - 1], n - 1)
    return rel_residual(lhs, rhs)


def intermediate_frozen_factor(w, M: int, N: int, n: int, mp: ModelParams) -> complex:
    """prod_{j > M-N+n} [w - v_j + q_j - p], the overall factor carried by Q_{M,N,n} in w_n."""
    b = _b(mp)
    val = 1.0 + 0j
    for j in range(M - N + n + 1, M + 1):
        val *= b(w - mp.vs[j - 1] + mp.qs[j - 1] - mp.p)
    return val


def intermediate_w_spec(M: int, N: int, n: int, mp: ModelParams, h) -> EllipticPolySpec:
    """Quasi-periodicity data of Q_{M,N,n} / frozen factor, as a function of w_n."""
    L = M - N + n
    const = h + (M + N + 3 * n - 2) * mp.p - sum(mp.vs[:L]) + sum(mp.qs[:L])
    return EllipticPolySpec.from_shift_constant(L, (-1) ** L, const)


def wavefunction_H(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    """prod_{j<k} [u_j - u_k - 2p] T(u; c; h) from the permutation sum."""
    if len(u_list) == 0:
        return 1.0 + 0j
    return deformed_vandermonde(u_list, -2 * mp.p, mp) * schur_T_sum(u_list, c, mp, h)


def vm_spec(u_list, mp: ModelParams, h) -> EllipticPolySpec:
    """Quasi-periodicity data of the C-wavefunction in v_M when the last particle sits at M."""
    N, M = len(u_list), mp.M
    const = -(h + 2 * mp.qbar[M - 1] + N * mp.qs[M - 1] + N * mp.p + sum(u_list))
    return EllipticPolySpec.from_shift_constant(N, (-1) ** N, const)


def _drop_last_site(c: Configuration) -> Configuration | None:
    if c.m_sites == 1:
        return None
    return Configuration(c.m_sites - 1, c.positions[:-1])


def recursion_rhs_V(u_list, c: Configuration, mp: ModelParams, h,
                    wavefunction: Callable = wavefunction_H) -> complex:
    """Right side of the v_M = u_N + p + q_M reduction, for x_N = M."""
    b, s = _b(mp), _s(mp)
    N, M, p, qb = len(u_list), mp.M, mp.p, mp.qbar
    uN = u_list[-1]
    val = s(2 * p) * s(2 * mp.qs[M - 1]) * s(h + 2 * qb[M - 1]) * s(h + 2 * (N - 1) * p)
    val /= _den(s(h + 2 * qb[M]) * s(h + 2 * N * p))
    for j in range(N - 1):
        val *= b(u_list[j] - uN - 2 * p)
    for j in range(1, M):
        val *= b(uN - mp.vs[j - 1] + p - mp.qs[j - 1])
    smaller = _drop_last_site(c)
    if smaller is not None and N > 1:
        val *= wavefunction(list(u_list[:-1]), smaller, mp.head(M - 1), h)
    return val


def recursion_residual_V(u_list, c: Configuration, mp: ModelParams, h,
                         wavefunction: Callable = wavefunction_H) -> float:
    """Relative gap of the x_N = M reduction V_{M,N} -> V_{M-1,N-1} at v_M = u_N + p + q_M."""
    M = mp.M
    if not c.positions or c.positions[-1] != M:
        raise ValueError("the reduction needs the last particle on site M")
    mp_star = mp.with_v(M, u_list[-1] + mp.p + mp.qs[M - 1])
    lhs = wavefunction(list(u_list), c, mp_star, h)
    rhs = recursion_rhs_V(u_list, c, mp_star, h, wavefunction)
    return rel_residual(lhs, rhs)


def factorization_residual_V(u_list, c: Configuration, mp: ModelParams, h,
                             wavefunction: Callable = wavefunction_H) -> float:
    """Relative gap of V_{M,N} = prod_j [u_j - v_M + q_M + p] V_{M-1,N} when site M is empty."""
    M = mp.M
    if c.positions and c.positions[-1] == M:
        raise ValueError("the factorization needs site M empty")
    if M < 2:
        raise ValueError("need at least two sites")
    b = _b(mp)
    lhs = wavefunction(list(u_list), c, mp, h)
    factor = 1.0 + 0j
    for u in u_list:
        factor *= b(u - mp.vs[M - 1] + mp.qs[M - 1] + mp.p)
    rhs = factor * wavefunction(list(u_list), Configuration(M - 1, c.positions), mp.head(M - 1), h)
    return rel_residual(lhs, rhs)


def inversions(sigma: Sequence[int]) -> list[tuple[int, int]]:
    return [(j, k) for j in range(len(sigma)) for k in range(j + 1, len(sigma)) if sigma[j] > sigma[k]]


def exchange_residual_V(sigma: Sequence[int], u_list, c: Configuration, mp: ModelParams, h,
                        wavefunction: Callable = wavefunction_H) -> float:
    """Relative gap of the reordering relation for V; ``sigma`` is a 0-based permutation."""
    if sorted(sigma) != list(range(len(u_list))):
        raise ValueError(f"{sigma} is not a permutation of 0..{len(u_list) - 1}")
    b = _b(mp)
    p = mp.p
    us = list(u_list)
    permuted = [us[i] for i in sigma]
    left = right = 1.0 + 0j
    for j, k in inversions(sigma):
        left *= b(us[sigma[j]] - us[sigma[k]] - 2 * p)
        right *= b(us[sigma[k]] - us[sigma[j]] - 2 * p)
    return rel_residual(left * wavefunction(us, c, mp, h), right * wavefunction(permuted, c, mp, h))


def v_base_case(u, mp: ModelParams, h, *, power: float = 1.0) -> complex:
    """One-particle C-wavefunction with the particle on site M.

    ``power`` is the exponent on the spectral bracket; 1 matches the lattice,
    0.5 is kept only to demonstrate that it does not.
    """
    b, s = _b(mp), _s(mp)
    M, p, qb = mp.M, mp.p, mp.qbar
    qM = mp.qs[M - 1]
    val = s(h) * s(2 * p) * s(2 * qM) / _den(s(h + 2 * p) * s(h + 2 * qb[M - 1]) * s(h + 2 * qb[M]))
    arg = u - mp.vs[M - 1] + h + p + qM + 2 * qb[M - 1]
    if power == 1.0:
        val *= b(arg)
    elif power == 0.5:
        val *= s(arg)
    else:
        raise ValueError("power must be 1 or 0.5")
    return val * d_eval(u, mp, range(1, M))
