"""Odd theta function H(u), the bracket [t] = H(pi i t), and quasi-periodicity checks.

The product form

    H(u) = 2 sinh(u) prod_{n>=1} (1 - 2 q^{2n} cosh(2u) + q^{4n}) (1 - q^{2n})

is truncated at ``n_max`` factors.  With nome ``q`` the bracket has quasi-periods
1 and ``tau = -i log(q) / pi``:

    [t + 1]   = -[t]
    [t + tau] = -q^{-1} exp(-2 pi i t) [t]
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

TRUNC_TOL = 1e-18
N_MAX_CAP = 64


class BranchCutWarning(UserWarning):
    """A square-rooted bracket value sits on or near the principal branch cut."""


class DegenerateInputError(ValueError):
    """Every sample point was rejected, so no residual could be formed."""


def default_n_max(nome: float, trunc_tol: float = TRUNC_TOL) -> int:
    """Smallest n with nome**(2n) < trunc_tol, capped at 64."""
    if nome == 0.0:
        return 1
    n = math.floor(math.log(trunc_tol) / (2.0 * math.log(nome))) + 1
    return max(1, min(n, N_MAX_CAP))


@dataclass(frozen=True)
class ThetaParams:
    """Nome plus truncation policy for the infinite product."""

    nome: float
    n_max: int = 0
    trunc_tol: float = TRUNC_TOL
    _qpow: np.ndarray = field(init=False, repr=False, compare=False)
    _qcoef: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.nome < 1.0):
            raise ValueError(f"nome must lie in (0, 1), got {self.nome!r}")
        if self.n_max <= 0:
            object.__setattr__(self, "n_max", default_n_max(self.nome, self.trunc_tol))
        q2n = self.nome ** (2.0 * np.arange(1, self.n_max + 1))
        object.__setattr__(self, "_qpow", q2n)
        # per-factor (2 q^{2n}, 1 + q^{4n}) and the constant prod (1 - q^{2n})
        coef = tuple((2.0 * x, 1.0 + x * x) for x in q2n.tolist())
        object.__setattr__(self, "_qcoef", (coef, float(np.prod(1.0 - q2n))))

    @property
    def tau(self) -> complex:
        return complex(0.0, -math.log(self.nome) / math.pi)

    @property
    def certified(self) -> bool:
        """True when the first omitted factor is below ``trunc_tol``."""
        return self.nome ** (2 * self.n_max) < self.trunc_tol

    def doubled(self) -> "ThetaParams":
        return ThetaParams(self.nome, n_max=2 * self.n_max, trunc_tol=self.trunc_tol)

    def with_n_max(self, n_max: int) -> "ThetaParams":
        return ThetaParams(self.nome, n_max=n_max, trunc_tol=self.trunc_tol)


def _check_finite(u) -> None:
    if not np.all(np.isfinite(u)):
        raise ValueError(f"theta argument must be finite, got {u!r}")


def theta_H(u, tp: ThetaParams):
    """Evaluate H(u) by the truncated product; accepts scalars or arrays."""
    if np.ndim(u) == 0:
        return _theta_scalar(complex(u), tp)
    z = np.asarray(u, dtype=complex)
    _check_finite(z)
    q2n = tp._qpow
    c2 = np.cosh(2.0 * z)[..., None]
    factors = (1.0 - 2.0 * q2n * c2 + q2n * q2n) * (1.0 - q2n)
    return 2.0 * np.sinh(z) * np.prod(factors, axis=-1)


def _theta_scalar(z: complex, tp: ThetaParams) -> complex:
    # plain-Python loop: an order of magnitude faster than numpy on scalars
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"theta argument must be finite, got {z!r}")
    coef, const = tp._qcoef
    c2 = cmath.cosh(2.0 * z)
    val = 2.0 * const * cmath.sinh(z)
    for two_q, one_plus in coef:
        val *= one_plus - two_q * c2
    return val


def bracket(t, tp: ThetaParams):
    """[t] = H(pi i t)."""
    if np.ndim(t):
        return theta_H(1j * np.pi * np.asarray(t, dtype=complex), tp)
    return _theta_scalar(1j * math.pi * complex(t), tp)


def bracket_sqrt(t, tp: ThetaParams, *, cut_tol: float = 1e-10) -> complex:
    """Principal square root of [t].

    For real t in (0, 1) the bracket is i times a positive number, so the root
    has argument pi/4 and roots of such values multiply consistently.  Values
    close to the negative real axis trigger a :class:`BranchCutWarning`.
    """
    z = bracket(t, tp)
    if z.real < 0.0 and abs(z.imag) <= cut_tol * abs(z):
        warnings.warn(
            f"[{t}] = {z} lies on the principal branch cut; half-powers may flip sign",
            BranchCutWarning,
            stacklevel=2,
        )
    return cmath.sqrt(z)


def theta_series(t: complex, nome: float, terms: int = 64) -> complex:
    """Independent evaluation of [t] from the sine series of the odd theta function.

    By the Jacobi triple product,
    sum_k (-1)^k q^{k(k+1)} sin((2k+1) z) = sin z prod_n (1 - q^{2n})(1 - 2 q^{2n} cos 2z + q^{4n}),
    so [t] = 2 i sum_k (-1)^k q^{k(k+1)} sin((2k+1) pi t).
    """
    z = math.pi * complex(t)
    s = 0j
    for k in range(terms):
        s += (-1) ** k * nome ** (k * (k + 1)) * cmath.sin((2 * k + 1) * z)
    return 2j * s


@dataclass(frozen=True)
class EllipticPolySpec:
    """Quasi-periodicity data of an elliptic polynomial of given degree.

    ``phi(y + 1) = chi_one * phi(y)`` and
    ``phi(y + tau) = chi_tau * exp(-2 pi i N y - pi i N tau) * phi(y)``.
    """

    degree: int
    chi_one: complex
    chi_tau: complex
    alpha: complex = 0j

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("elliptic polynomial degree must be >= 1")
        if self.chi_one == 0 or self.chi_tau == 0:
            raise ValueError("characters must be nonzero")

    @classmethod
    def from_shift_constant(cls, degree: int, chi_one: complex, constant: complex) -> "EllipticPolySpec":
        """Spec for a function whose tau-shift factor is (-1/q)^N exp(-2 pi i (N y + constant)).

        This is the form produced by a product of N brackets [y + c_i] with
        ``constant = sum(c_i)``.
        """
        alpha = -2j * math.pi * complex(constant)
        return cls(degree, chi_one, (-1) ** degree * cmath.exp(alpha), alpha)

    def tau_factor(self, y: complex, tp: ThetaParams) -> complex:
        n = self.degree
        return self.chi_tau * cmath.exp(-2j * math.pi * n * y - 1j * math.pi * n * tp.tau)


def quasi_period_residual(
    f: Callable[[complex], complex],
    spec: EllipticPolySpec,
    tp: ThetaParams,
    samples: Iterable[complex],
    *,
    zero_tol: float = 1e-14,
    return_skipped: bool = False,
):
    """Max relative residual of both quasi-periodicities over ``samples``.

    Each residual is normalised by the magnitude of the predicted value, so a
    large tau-shift factor does not inflate the rounding floor.  Samples where
    ``|f(y)|`` falls below ``zero_tol`` times the median magnitude are skipped.
    """
    pts = [complex(y) for y in samples]
    vals = [complex(f(y)) for y in pts]
    scale = float(np.median([abs(v) for v in vals])) if vals else 0.0
    worst = 0.0
    used = 0
    skipped = 0
    for y, fy in zip(pts, vals):
        if scale == 0.0 or abs(fy) <= zero_tol * scale:
            skipped += 1
            continue
        pred1 = spec.chi_one * fy
        r1 = abs(f(y + 1.0) - pred1) / abs(pred1)
        pred_tau = spec.tau_factor(y, tp) * fy
        r2 = abs(f(y + tp.tau) - pred_tau) / abs(pred_tau)
        worst = max(worst, r1, r2)
        used += 1
    if used == 0:
        raise DegenerateInputError("all quasi-periodicity samples sit at zeros of f")
    if return_skipped:
        return worst, skipped
    return worst
