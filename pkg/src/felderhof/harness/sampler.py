"""Branch-safe random parameters.

Every height combination that ends up under a square root has the form
h + 2kp + 2*qbar_j with 0 <= k <= 2N, so requiring

    eps < h   and   h + 4Np + 2*qbar_M < 1 - eps

keeps all of them real in (eps, 1 - eps), where [x] = i * (positive) and
principal roots multiply consistently.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..lattice import ModelParams
from ..theta import ThetaParams

EPS = 0.02
DELTA_SPECTRAL = 0.03
SPECTRAL_WINDOW = 0.8
P_MIN = 0.01
ZERO_MARGIN = 0.05
P_CAP = 0.05
DEFAULT_NOME = 0.1
NOME_SWEEP = (0.05, 0.1, 0.2)


class ConfigError(ValueError):
    """The requested configuration cannot be sampled or run."""


@dataclass(frozen=True)
class SuiteConfig:
    suites: tuple[str, ...] = ("all",)
    m: int | None = None
    n: int | None = None
    nome: float | None = None
    samples: int | None = None
    seed: int = 0
    tol: float | None = None
    tolerances: dict = field(default_factory=dict)
    eps: float = EPS
    delta_spectral: float = DELTA_SPECTRAL
    spectral_window: float = SPECTRAL_WINDOW
    p_min: float = P_MIN
    zero_margin: float = ZERO_MARGIN

    def __post_init__(self) -> None:
        if self.nome is not None and not (0.0 < self.nome < 1.0):
            raise ConfigError(f"nome must lie in (0, 1), got {self.nome}")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.m is not None and self.m < 1:
            raise ConfigError("M must be positive")
        if self.n is not None and self.n < 0:
            raise ConfigError("N must be non-negative")
        if self.m is not None and self.n is not None and self.n > self.m:
            raise ConfigError(f"N={self.n} exceeds M={self.m}")
        if not (0.0 < self.eps < 0.25):
            raise ConfigError("eps must lie in (0, 0.25)")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError("tolerance must be positive")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def tolerance_for(self, identity: str, default: float) -> float:
        if identity in self.tolerances:
            return float(self.tolerances[identity])
        if self.tol is not None:
            return self.tol
        return default

    def as_dict(self) -> dict:
        return {
            "suites": list(self.suites),
            "m": self.m,
            "n": self.n,
            "nome": self.nome,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "tolerances": dict(sorted(self.tolerances.items())),
            "eps": self.eps,
            "delta_spectral": self.delta_spectral,
            "spectral_window": self.spectral_window,
            "p_min": self.p_min,
            "zero_margin": self.zero_margin,
        }


def suite_rng(seed: int, suite_id: str, identity: str | None = None) -> np.random.Generator:
    """PCG64 stream derived from (seed, suite id), optionally split per identity.

    The per-identity split keeps draws unchanged when only part of a suite is run.
    """
    key = [seed, zlib.crc32(suite_id.encode())]
    if identity is not None:
        key.append(zlib.crc32(identity.encode()))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def height_budget(N: int, p: float, qbar_M: float, h: float) -> float:
    """Largest square-rooted height h + 4Np + 2 qbar_M."""
    return h + 4 * N * p + 2 * qbar_M


def check_budget(M: int, N: int, p: float, qs, h: float, eps: float = EPS) -> None:
    """Raise ConfigError unless eps < h and h + 4Np + 2 qbar_M < 1 - eps."""
    top = height_budget(N, p, float(sum(qs)), h)
    if not h > eps:
        raise ConfigError(f"height h={h} must exceed eps={eps}")
    if not top < 1 - eps:
        raise ConfigError(
            f"h + 4Np + 2*qbar_M < 1 - eps violated: {h} + {4 * N * p} + {2 * sum(qs)} = {top} >= {1 - eps} (M={M}, N={N})"
        )
    if p <= 0 or any(q <= 0 for q in qs):
        raise ConfigError("p and all q_j must be positive")


def p_upper(M: int, N: int, eps: float = EPS) -> float:
    """Upper end of the (p, q_j) range; half the height budget is left for h."""
    weight = 4 * N + 2 * M
    if weight == 0:
        return P_CAP
    return min(P_CAP, 0.5 * (1 - 2 * eps) / weight)


def spectral_values(rng: np.random.Generator, k: int, window: float, delta: float) -> list[float]:
    """k reals in (0, window), pairwise at least delta apart, in random order.

    Jittered stratified draw: (0, window) is cut into k equal strata and each
    value is uniform in its stratum shrunk by delta/2 at both ends.  This keeps
    the ratio of spread to minimum gap bounded, which is what controls the
    rounding error of the determinant and permutation-sum forms.
    """
    if k == 0:
        return []
    width = window / k
    if width <= delta:
        raise ConfigError(f"cannot place {k} spectral values {delta} apart inside (0, {window})")
    x = width * np.arange(k) + rng.uniform(delta / 2, width - delta / 2, k)
    return [float(v) for v in rng.permutation(x)]


def distance_to_integers(x: float) -> float:
    return abs(x - round(x))


@dataclass(frozen=True)
class Sample:
    mp: ModelParams
    u: list[float]
    w: list[float]

    def point(self) -> dict:
        return model_point(self.mp) | {"u": list(self.u), "w": list(self.w)}


def model_point(mp: ModelParams) -> dict:
    return {
        "nome": mp.theta.nome,
        "p": float(mp.p),
        "h": float(mp.h),
        "vs": [float(v) for v in mp.vs],
        "qs": [float(q) for q in mp.qs],
    }


def model_from_point(pt: dict, tp: ThetaParams | None = None) -> ModelParams:
    tp = tp or ThetaParams(pt["nome"])
    return ModelParams(tp, pt["p"], pt["h"], tuple(pt["vs"]), tuple(pt["qs"]))


def sample_safe_params(
    M: int,
    N: int,
    rng: np.random.Generator,
    *,
    nome: float = DEFAULT_NOME,
    n_w: int | None = None,
    cfg: SuiteConfig | None = None,
) -> Sample:
    """Draw (p, q_j, h, v_j) in the safe domain plus N u's and n_w w's.

    p and q_j are uniform on (p_min, p_up) with p_up chosen so that the
    largest square-rooted height uses at most half of (eps, 1 - eps); h is
    then uniform on what remains.  Spectral values share one separated draw.
    """
    cfg = cfg or SuiteConfig()
    eps = cfg.eps
    n_w = N if n_w is None else n_w
    p_up = p_upper(M, N, eps)
    if p_up <= cfg.p_min:
        raise ConfigError(
            f"h + 4Np + 2*qbar_M < 1 - eps cannot hold with p, q_j >= {cfg.p_min}: "
            f"(4N + 2M) * p_min = {(4 * N + 2 * M) * cfg.p_min} is not below half of 1 - 2*eps = {0.5 * (1 - 2 * eps)} (M={M}, N={N})"
        )
    p = float(rng.uniform(cfg.p_min, p_up))
    qs = [float(x) for x in rng.uniform(cfg.p_min, p_up, M)]
    top = 1 - eps - (4 * N * p + 2 * sum(qs))
    h = float(rng.uniform(eps, top))
    check_budget(M, N, p, qs, h, eps)
    spec = spectral_values(rng, M + N + n_w, cfg.spectral_window, cfg.delta_spectral)
    mp = ModelParams(ThetaParams(nome), p, h, tuple(spec[:M]), tuple(qs))
    return Sample(mp, spec[M : M + N], spec[M + N :])
