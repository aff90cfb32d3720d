"""Dynamical R-matrix, B/C operators and brute-force partition functions.

Index convention for R: ``R[2*g + d, 2*a + b] = <g|_a <d|_b R |a>_a |b>_b``.
The monodromy matrix is the ordered product L_1 L_2 ... L_M of L-operators
(L = R with the quantum space in slot b), where site j sits at height
``h + 2*qbar[j-1]``.  B = <0|_a T |1>_a and C = <1|_a T |0>_a.

Operators are applied by sweeping the two-state auxiliary line across the sites
from left to right.  The heights never depend on the quantum configuration,
so a sweep is just a product of 2x2-aux transfer steps.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .statespace import (
    Configuration,
    SectorVector,
    configuration_state,
    inner,
    mixed_dual,
    sector_basis,
    vacuum,
)
from .theta import ThetaParams, bracket, bracket_sqrt


class SingularHeightError(ZeroDivisionError):
    """A height bracket in a denominator vanishes."""


class SectorError(ValueError):
    """An operator would leave the allowed particle-number range."""


SINGULAR_TOL = 1e-300


@dataclass(frozen=True)
class ModelParams:
    """Global data of the lattice: nome, p, default height h and per-site (v_j, q_j)."""

    theta: ThetaParams
    p: complex
    h: complex
    vs: tuple[complex, ...]
    qs: tuple[complex, ...]
    qbar: tuple[complex, ...] = field(init=False)

    def __post_init__(self) -> None:
        vs = tuple(self.vs)
        qs = tuple(self.qs)
        if len(vs) != len(qs):
            raise ValueError("need one q_j per v_j")
        object.__setattr__(self, "vs", vs)
        object.__setattr__(self, "qs", qs)
        acc = [0.0]
        for q in qs:
            acc.append(acc[-1] + q)
        object.__setattr__(self, "qbar", tuple(acc))

    @property
    def M(self) -> int:
        return len(self.vs)

    @property
    def sites(self) -> list[tuple[complex, complex]]:
        return list(zip(self.vs, self.qs))

    def site_height(self, h: complex, j: int) -> complex:
        """Height of the face to the upper left of site j (1-based)."""
        return h + 2 * self.qbar[j - 1]

    def head(self, m: int) -> "ModelParams":
        """Keep sites 1..m."""
        return replace(self, vs=self.vs[:m], qs=self.qs[:m])

    def tail(self, start: int) -> "ModelParams":
        """Keep sites start..M (1-based)."""
        return replace(self, vs=self.vs[start - 1 :], qs=self.qs[start - 1 :])

    def with_v(self, j: int, value: complex) -> "ModelParams":
        vs = list(self.vs)
        vs[j - 1] = value
        return replace(self, vs=tuple(vs))

    def with_theta(self, tp: ThetaParams) -> "ModelParams":
        return replace(self, theta=tp)


@dataclass(frozen=True)
class RWeights:
    a_plus: complex
    b_plus: complex
    c_plus: complex
    c_minus: complex
    b_minus: complex
    a_minus: complex


def _nonsingular(x: complex, what: str) -> complex:
    if abs(x) < SINGULAR_TOL:
        raise SingularHeightError(f"{what} vanishes")
    return x


def r_weights(u, v, p, q, h, tp: ThetaParams) -> RWeights:
    """The six nonzero entries of the dynamical R-matrix."""
    s = lambda t: bracket_sqrt(t, tp)  # noqa: E731
    b = lambda t: bracket(t, tp)  # noqa: E731
    den = _nonsingular(s(h + 2 * p), "[h+2p]") * _nonsingular(s(h + 2 * q), "[h+2q]")
    diag = s(h) * s(h + 2 * p + 2 * q) / den
    off = s(2 * p) * s(2 * q) / den
    return RWeights(
        a_plus=b(u - v + p + q),
        b_plus=diag * b(u - v + q - p),
        c_plus=off * b(-u + v + q + p + h),
        c_minus=off * b(u - v + q + p + h),
        b_minus=diag * b(u - v - q + p),
        a_minus=b(-u + v + p + q),
    )


def r_matrix(u, v, p, q, h, tp: ThetaParams) -> np.ndarray:
    w = r_weights(u, v, p, q, h, tp)
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = w.a_plus
    R[1, 1] = w.b_plus  # <01|R|01>
    R[1, 2] = w.c_plus  # <01|R|10>
    R[2, 1] = w.c_minus  # <10|R|01>
    R[2, 2] = w.b_minus  # <10|R|10>
    R[3, 3] = w.a_minus
    return R


def _embed(R: np.ndarray, slots: str) -> np.ndarray:
    """Lift a 4x4 operator on two of the three tensor factors a, b, c to 8x8."""
    I2 = np.eye(2)
    if slots == "ab":
        return np.kron(R, I2)
    if slots == "bc":
        return np.kron(I2, R)
    if slots == "ac":
        T = R.reshape(2, 2, 2, 2)  # (out_a, out_c, in_a, in_c)
        return np.einsum("gdab,ek->gedakb", T, I2).reshape(8, 8)
    raise ValueError(slots)


def ybe_residual(u, v, w, p, q, r, h, tp: ThetaParams) -> float:
    """Normalised max entrywise gap between the two sides of the dynamical Yang-Baxter relation."""
    lhs = (
        _embed(r_matrix(u, v, p, q, h, tp), "ab")
        @ _embed(r_matrix(u, w, p, r, h + 2 * q, tp), "ac")
        @ _embed(r_matrix(v, w, q, r, h, tp), "bc")
    )
    rhs = (
        _embed(r_matrix(v, w, q, r, h + 2 * p, tp), "bc")
        @ _embed(r_matrix(u, w, p, r, h, tp), "ac")
        @ _embed(r_matrix(u, v, p, q, h + 2 * r, tp), "ab")
    )
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


def _transitions(w: RWeights):
    """Map (aux_left, quantum_in) -> [(aux_right, quantum_out, weight)]."""
    return {
        (0, 0): ((0, 0, w.a_plus), (1, 1, w.c_plus)),
        (0, 1): ((0, 1, w.b_plus),),
        (1, 0): ((1, 0, w.b_minus),),
        (1, 1): ((0, 0, w.c_minus), (1, 1, w.a_minus)),
    }


def _sweep(u, h, mp: ModelParams, vec: SectorVector, aux_left: int, aux_right: int, k_out: int) -> SectorVector:
    tp = mp.theta
    states: dict[tuple[int, int], complex] = {(aux_left, m): a for m, a in vec.items()}
    for j in range(1, mp.M + 1):
        w = r_weights(u, mp.vs[j - 1], mp.p, mp.qs[j - 1], mp.site_height(h, j), tp)
        table = _transitions(w)
        bit = 1 << (j - 1)
        nxt: dict[tuple[int, int], complex] = defaultdict(complex)
        for (g, mask), amp in states.items():
            for a, d, wt in table[(g, 1 if mask & bit else 0)]:
                nxt[(a, mask | bit if d else mask & ~bit)] += amp * wt
        states = nxt
    basis = sector_basis(mp.M, k_out)
    out = np.zeros(len(basis), dtype=complex)
    for (a, mask), amp in states.items():
        if a == aux_right:
            out[basis.index_of_mask(mask)] += amp
    return SectorVector(basis, out)


def _check_sites(mp: ModelParams, vec: SectorVector) -> None:
    if vec.m_sites != mp.M:
        raise SectorError(f"vector lives on {vec.m_sites} sites, model has {mp.M}")


def apply_B(u, h, mp: ModelParams, vec: SectorVector) -> SectorVector:
    """B(u | h) = <0|_a T_a |1>_a: adds one particle."""
    _check_sites(mp, vec)
    if vec.particle_count >= mp.M:
        raise SectorError("B cannot act on the fully packed sector")
    return _sweep(u, h, mp, vec, 0, 1, vec.particle_count + 1)


def apply_C(u, h, mp: ModelParams, vec: SectorVector) -> SectorVector:
    """C(u | h) = <1|_a T_a |0>_a: removes one particle."""
    _check_sites(mp, vec)
    if vec.particle_count == 0:
        raise SectorError("C cannot act on the empty sector")
    return _sweep(u, h, mp, vec, 1, 0, vec.particle_count - 1)


def b_string(u_list: Sequence[complex], h0, mp: ModelParams, vec: SectorVector) -> SectorVector:
    """B(u_N | h0 + 2(N-1)p) ... B(u_1 | h0) vec."""
    if vec.particle_count + len(u_list) > mp.M:
        raise SectorError(f"{len(u_list)} B-operators overflow a {mp.M}-site lattice")
    for j, u in enumerate(u_list):
        vec = apply_B(u, h0 + 2 * j * mp.p, mp, vec)
    return vec


def c_string(w_list: Sequence[complex], h_start, mp: ModelParams, vec: SectorVector) -> SectorVector:
    """C(w_n | h_start + 2(n-1)p) ... C(w_1 | h_start) vec."""
    if len(w_list) > vec.particle_count:
        raise SectorError(f"{len(w_list)} C-operators underflow sector k={vec.particle_count}")
    for j, w in enumerate(w_list):
        vec = apply_C(w, h_start + 2 * j * mp.p, mp, vec)
    return vec


def dwbp_brute(u_list: Sequence[complex], mp: ModelParams, h) -> complex:
    """Domain-wall partition function: fully packed amplitude of N B's on the vacuum."""
    N = len(u_list)
    if mp.M != N:
        raise ValueError(f"domain-wall boundary needs M = N, got M={mp.M}, N={N}")
    full = Configuration(N, tuple(range(1, N + 1)))
    return inner(full, b_string(u_list, h, mp, vacuum(N)))


def intermediate_sp_brute(u_list, w_list, n: int, mp: ModelParams, h) -> complex:
    """<0^{M-N+n} 1^{N-n}| C(w_n)...C(w_1) B(u_N)...B(u_1) |Omega>."""
    N = len(u_list)
    if len(w_list) != n:
        raise ValueError(f"need exactly n={n} C spectral parameters, got {len(w_list)}")
    if not (0 <= n <= N <= mp.M):
        raise ValueError(f"need 0 <= n <= N <= M, got n={n}, N={N}, M={mp.M}")
    state = b_string(u_list, h, mp, vacuum(mp.M))
    state = c_string(w_list, h + 2 * N * mp.p, mp, state)
    return inner(mixed_dual(mp.M, N, n), state)


def scalar_product_brute(u_list, w_list, mp: ModelParams, h) -> complex:
    """<Omega| C(w_N)...C(w_1) B(u_N)...B(u_1) |Omega> with the C ladder starting at h + 2Np."""
    N = len(u_list)
    if len(w_list) != N:
        raise ValueError("scalar product needs as many w's as u's")
    if N > mp.M:
        raise ValueError(f"N={N} exceeds M={mp.M}")
    return intermediate_sp_brute(u_list, w_list, N, mp, h)


def wavefunctions_W(u_list, mp: ModelParams, h) -> SectorVector:
    """All W values at once: the vector B(u_N)...B(u_1)|Omega>."""
    return b_string(u_list, h, mp, vacuum(mp.M))


def wavefunction_W_brute(u_list, c: Configuration, mp: ModelParams, h) -> complex:
    if c.n_particles != len(u_list) or c.m_sites != mp.M:
        raise ValueError("configuration does not match the number of B-operators / sites")
    return inner(c, wavefunctions_W(u_list, mp, h))


def wavefunction_V_brute(w_list, c: Configuration, mp: ModelParams, h) -> complex:
    """<Omega| C(w_N | h + 2(N-1)p) ... C(w_1 | h) |c>."""
    if c.n_particles != len(w_list) or c.m_sites != mp.M:
        raise ValueError("configuration does not match the number of C-operators / sites")
    state = c_string(w_list, h, mp, configuration_state(c))
    return complex(state.amplitudes[0])


def _c_element_state(k: int, n: int, N: int, M: int) -> Configuration:
    L = M - N + n
    return Configuration(M, (k,) + tuple(range(L + 1, M + 1)))


def c_matrix_element_brute(k: int, w, n: int, N: int, mp: ModelParams, h) -> complex:
    """<0^L 1^{N-n}| C(w | h + 2(N+n-1)p) |0^{k-1} 1 0^{L-k} 1^{N-n}> by a single sweep, L = M-N+n."""
    M = mp.M
    if not (1 <= n <= N <= M) or not (1 <= k <= M - N + n):
        raise ValueError(f"index out of range: k={k}, n={n}, N={N}, M={M}")
    ket = configuration_state(_c_element_state(k, n, N, M))
    out = apply_C(w, h + 2 * (N + n - 1) * mp.p, mp, ket)
    return inner(mixed_dual(M, N, n), out)


def c_matrix_element_closed(k: int, w, n: int, N: int, mp: ModelParams, h) -> complex:
    """Closed product for the single-C matrix element between the intermediate dual states."""
    M = mp.M
    L = M - N + n
    if not (1 <= n <= N <= M) or not (1 <= k <= L):
        raise ValueError(f"index out of range: k={k}, n={n}, N={N}, M={M}")
    tp = mp.theta
    p = mp.p
    qb = mp.qbar
    s = lambda t: bracket_sqrt(t, tp)  # noqa: E731
    b = lambda t: bracket(t, tp)  # noqa: E731
    H0 = h + 2 * (N + n - 1) * p
    H1 = h + 2 * (N + n) * p

    def passing(j: int, spectral) -> complex:
        return s(H0 + 2 * qb[j - 1]) * s(H1 + 2 * qb[j]) * spectral / (s(H1 + 2 * qb[j - 1]) * s(H0 + 2 * qb[j]))

    val = 1.0 + 0j
    for j in range(1, k):
        val *= passing(j, b(w - mp.vs[j - 1] - mp.qs[j - 1] + p))
    vk, qk = mp.vs[k - 1], mp.qs[k - 1]
    val *= s(2 * p) * s(2 * qk) * b(w - vk + qk + p + H0 + 2 * qb[k - 1]) / (s(H1 + 2 * qb[k - 1]) * s(H0 + 2 * qb[k]))
    for j in range(k + 1, L + 1):
        val *= b(w - mp.vs[j - 1] + p + mp.qs[j - 1])
    for j in range(L + 1, M + 1):
        val *= passing(j, b(w - mp.vs[j - 1] + mp.qs[j - 1] - p))
    return val


def frozen_factor(u_list, mp: ModelParams, columns: int) -> complex:
    """prod_{j, k <= columns} [u_j - v_k + p + q_k]: the frozen left block of the n = 0 lattice."""
    tp = mp.theta
    val = 1.0 + 0j
    for u in u_list:
        for k in range(columns):
            val *= bracket(u - mp.vs[k] + mp.p + mp.qs[k], tp)
    return val


def frozen_decomposition(u_list, mp: ModelParams, h) -> complex:
    """Frozen block times the domain-wall function of the last N columns at height h + 2 qbar_{M-N}."""
    N = len(u_list)
    M = mp.M
    return frozen_factor(u_list, mp, M - N) * dwbp_brute(u_list, mp.tail(M - N + 1), h + 2 * mp.qbar[M - N])


def spectral_separation(values: Sequence[complex]) -> float:
    vals = list(values)
    if len(vals) < 2:
        return math.inf
    return min(abs(a - b) for i, a in enumerate(vals) for b in vals[i + 1 :])
