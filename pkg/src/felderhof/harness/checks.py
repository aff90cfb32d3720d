"""Identity registry, suite runner and JSON reports.

An identity is a pair (draw, evaluate): ``draw`` turns an RNG and a size into a
JSON-serialisable parameter point, ``evaluate`` turns a point into a relative
residual.  Keeping the point self-contained lets the runner re-evaluate the
worst point at doubled theta truncation when a check fails.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from itertools import permutations
from typing import Callable

import numpy as np

from .. import closedforms as cf
from .. import lattice as lt
from ..statespace import Configuration, sector_basis
from ..theta import EllipticPolySpec, ThetaParams, bracket, quasi_period_residual, theta_series
from .sampler import (
    DEFAULT_NOME,
    NOME_SWEEP,
    ConfigError,
    SuiteConfig,
    distance_to_integers,
    model_from_point,
    sample_safe_params,
    spectral_values,
    suite_rng,
)

Size = tuple  # (M, N), (N,) or ()

NEGATIVE_CONTROL_GAP = 1e-3


@dataclass(frozen=True)
class Identity:
    name: str
    suite: str
    anchor: str
    tol: float
    samples: int
    sizes: tuple
    evaluate: Callable[[dict, ThetaParams], float]
    draw: Callable[[np.random.Generator, SuiteConfig, Size, float], dict]
    shape: str = "grid"
    sweep_nome: bool = False
    expect: str = "agree"


@dataclass
class CheckResult:
    identity: str
    suite: str
    anchor: str
    samples: int
    max_rel_residual: float | None
    worst_point: dict | None
    tolerance: float
    passed: bool
    expect: str = "agree"
    min_rel_residual: float | None = None
    error: str | None = None
    triage: dict | None = None

    def as_dict(self) -> dict:
        d = {
            "identity": self.identity,
            "suite": self.suite,
            "anchor": self.anchor,
            "samples": self.samples,
            "max_rel_residual": self.max_rel_residual,
            "worst_point": self.worst_point,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "expect": self.expect,
        }
        if self.expect == "differ":
            d["min_rel_residual"] = self.min_rel_residual
        if self.error is not None:
            d["error"] = self.error
        if self.triage is not None:
            d["triage"] = self.triage
        return d


REGISTRY: dict[str, Identity] = {}
SUITES: list[str] = []


def _model_draw(rng, cfg: SuiteConfig, size: Size, nome: float) -> dict:
    M, N = size
    s = sample_safe_params(M, N, rng, nome=nome, cfg=cfg)
    return s.point() | {"M": M, "N": N}


def register(name, suite, anchor, tol, samples, sizes=((),), *, draw=None, shape="grid",
             sweep_nome=False, expect="agree"):
    def deco(fn):
        REGISTRY[name] = Identity(name, suite, anchor, tol, samples, tuple(sizes), fn,
                                  draw or _model_draw, shape, sweep_nome, expect)
        if suite not in SUITES:
            SUITES.append(suite)
        return fn

    return deco


def _mp(pt: dict, tp: ThetaParams | None) -> lt.ModelParams:
    return model_from_point(pt, tp)


rel = cf.rel_residual


# --------------------------------------------------------------------------
# theta


def _theta_draw(rng, cfg, size, nome):
    tau_im = -math.log(nome) / math.pi
    return {
        "nome": nome,
        "t_re": float(rng.uniform(-1.0, 1.0)),
        "t_im": float(rng.uniform(-0.5, 0.5) * tau_im),
        "a": float(rng.uniform(0.0, 1.0)),
        "b": float(rng.uniform(0.0, 1.0)),
    }


def _tp(pt, tp):
    return tp or ThetaParams(pt["nome"])


@register("theta.period_one", "theta", "bracket quasi-period 1", 1e-12, 200, draw=_theta_draw, sweep_nome=True)
def _(pt, tp):
    tp = _tp(pt, tp)
    t = complex(pt["t_re"], pt["t_im"])
    return rel(bracket(t + 1, tp), -bracket(t, tp))


@register("theta.period_tau", "theta", "bracket quasi-period tau", 1e-12, 200, draw=_theta_draw, sweep_nome=True)
def _(pt, tp):
    tp = _tp(pt, tp)
    t = complex(pt["t_re"], pt["t_im"])
    return rel(bracket(t + tp.tau, tp), -cmath.exp(-2j * math.pi * t) / tp.nome * bracket(t, tp))


@register("theta.product_of_two", "theta", "elliptic polynomial of degree two", 1e-11, 50, draw=_theta_draw, sweep_nome=True)
def _(pt, tp):
    tp = _tp(pt, tp)
    a, b = pt["a"], pt["b"]
    spec = EllipticPolySpec.from_shift_constant(2, 1, -(a + b))
    y = complex(pt["t_re"], pt["t_im"])
    return quasi_period_residual(lambda x: bracket(x - a, tp) * bracket(x - b, tp), spec, tp, [y])


@register("theta.series", "theta", "product form against the sine series", 1e-13, 200, draw=_theta_draw, sweep_nome=True)
def _(pt, tp):
    tp = _tp(pt, tp)
    t = complex(pt["t_re"], pt["t_im"])
    return rel(bracket(t, tp), theta_series(t, pt["nome"]))


# --------------------------------------------------------------------------
# dynamical Yang-Baxter


def _ybe_draw(rng, cfg, size, nome):
    p, q, r = (float(x) for x in rng.uniform(cfg.p_min, 0.05, 3))
    u, v, w = spectral_values(rng, 3, cfg.spectral_window, cfg.delta_spectral)
    h = float(rng.uniform(cfg.eps, 1 - cfg.eps - 2 * (p + q + r)))
    return {"nome": nome, "u": u, "v": v, "w": w, "p": p, "q": q, "r": r, "h": h}


@register("ybe.dynamical", "ybe", "dynamical Yang-Baxter relation", 1e-11, 100, draw=_ybe_draw, sweep_nome=True)
def _(pt, tp):
    tp = _tp(pt, tp)
    return lt.ybe_residual(pt["u"], pt["v"], pt["w"], pt["p"], pt["q"], pt["r"], pt["h"], tp)


# --------------------------------------------------------------------------
# domain-wall boundary


MAX_REDRAWS = 200


def _away_from_zeros_draw(rng, cfg, size, nome):
    """Model draw redrawn until the domain-wall form has no factor near a zero.

    The lattice side is a sum whose terms do not vanish there, so close to such
    a zero the relative residual only measures cancellation in that sum.
    """
    M, N = size
    for _ in range(MAX_REDRAWS):
        pt = _model_draw(rng, cfg, size, nome)
        mp = model_from_point(pt)
        tail = mp.tail(M - N + 1)
        h = mp.h + 2 * mp.qbar[M - N]
        if min((distance_to_integers(x) for x in cf.dwbp_factor_arguments(pt["u"], tail, h)), default=1.0) >= cfg.zero_margin:
            return pt
    raise ConfigError(f"no draw keeps the domain-wall factors {cfg.zero_margin} away from zero (M={M}, N={N})")


@register("dwbp.factorized", "dwbp", "factorized domain-wall partition function", 1e-10, 20,
          sizes=((1, 1), (2, 2), (3, 3), (4, 4)), shape="square", draw=_away_from_zeros_draw)
def _(pt, tp):
    mp = _mp(pt, tp)
    return rel(cf.dwbp_factorized(pt["u"], mp, mp.h), lt.dwbp_brute(pt["u"], mp, mp.h))


@register("dwbp.frozen_columns", "dwbp", "frozen-column decomposition at n = 0", 1e-11, 5,
          sizes=((4, 2), (5, 3), (6, 3)), draw=_away_from_zeros_draw)
def _(pt, tp):
    mp = _mp(pt, tp)
    return rel(lt.frozen_decomposition(pt["u"], mp, mp.h), lt.intermediate_sp_brute(pt["u"], [], 0, mp, mp.h))


# --------------------------------------------------------------------------
# scalar products


@register("scalar.determinant", "scalar", "determinant formula for scalar products", 1e-9, 10,
          sizes=((2, 1), (4, 2), (6, 3), (8, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    return rel(cf.scalar_product_det(pt["u"], pt["w"], mp, mp.h), lt.scalar_product_brute(pt["u"], pt["w"], mp, mp.h))


@register("scalar.completeness", "scalar", "scalar product as a sum over configurations", 1e-11, 3,
          sizes=((4, 2), (6, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    u, w, h, N = pt["u"], pt["w"], mp.h, pt["N"]
    W = lt.wavefunctions_W(u, mp, h)
    total = sum(lt.wavefunction_V_brute(w, c, mp, h + 2 * N * mp.p) * W.amplitude(c) for c in W.basis.configs)
    return rel(total, lt.scalar_product_brute(u, w, mp, h))


# --------------------------------------------------------------------------
# intermediate scalar products


@register("intermediate.determinant", "intermediate", "determinant formula for intermediate scalar products", 1e-9, 5,
          sizes=((4, 2), (5, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N, u, w = pt["M"], pt["N"], pt["u"], pt["w"]
    return max(
        rel(cf.intermediate_sp_det(u, w[:n], M, N, n, mp, mp.h), lt.intermediate_sp_brute(u, w[:n], n, mp, mp.h))
        for n in range(N + 1)
    )


@register("intermediate.general_at_top", "intermediate", "n-generic determinant at n = N", 1e-9, 5,
          sizes=((4, 2), (5, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N, u, w = pt["M"], pt["N"], pt["u"], pt["w"]
    return rel(cf.intermediate_sp_det(u, w, M, N, N, mp, mp.h, general=True), lt.scalar_product_brute(u, w, mp, mp.h))


@register("intermediate.prefactor_forms", "intermediate", "two forms of the intermediate prefactor", 1e-12, 3,
          sizes=((2, 1), (4, 2), (5, 3), (6, 4)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N = pt["M"], pt["N"]
    return max(
        rel(cf.intermediate_prefactor_D(M, N, n, mp, mp.h), cf.intermediate_prefactor_D_ladder(M, N, n, mp, mp.h))
        for n in range(N + 1)
    )


@register("intermediate.recursion", "intermediate", "recursion for intermediate scalar products", 1e-10, 5,
          sizes=((4, 2), (3, 2), (2, 2), (5, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N = pt["M"], pt["N"]
    return max(cf.recursion_residual_intermediate(pt["u"], pt["w"], M, N, n, mp, mp.h) for n in range(1, N + 1))


@register("intermediate.recursion_lattice", "intermediate", "recursion for intermediate scalar products on the lattice",
          1e-11, 3, sizes=((4, 2), (3, 2)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N = pt["M"], pt["N"]

    def brute(us, ws, m):
        return lt.intermediate_sp_brute(us, ws, m, mp, mp.h)

    return max(cf.recursion_residual_intermediate(pt["u"], pt["w"], M, N, n, mp, mp.h, brute) for n in range(1, N + 1))


@register("intermediate.n0_forms", "intermediate", "n = 0 evaluation, factorized and determinant", 1e-11, 5,
          sizes=((4, 2), (5, 3), (6, 3), (3, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    u, h = pt["u"], mp.h
    fac = cf.q0_factorized(u, mp, h)
    return max(rel(cf.q0_det(u, mp, h), fac), rel(fac, lt.intermediate_sp_brute(u, [], 0, mp, h)))


@register("intermediate.c_element", "intermediate", "single C-operator matrix element", 1e-12, 3,
          sizes=((3, 1), (4, 2), (5, 3)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M, N, w = pt["M"], pt["N"], pt["w"][0]
    worst = 0.0
    for n in range(1, N + 1):
        for k in range(1, M - N + n + 1):
            worst = max(worst, rel(lt.c_matrix_element_closed(k, w, n, N, mp, mp.h),
                                   lt.c_matrix_element_brute(k, w, n, N, mp, mp.h)))
    return worst


# --------------------------------------------------------------------------
# Frobenius


def _frobenius_draw(rng, cfg, size, nome):
    # the right side vanishes when lam + sum(z - w) is an integer; stay clear of that
    (N,) = size
    for _ in range(MAX_REDRAWS):
        vals = spectral_values(rng, 2 * N, cfg.spectral_window, cfg.delta_spectral)
        lam = float(rng.uniform(0.2, 0.8))
        if distance_to_integers(lam + sum(vals[:N]) - sum(vals[N:])) >= cfg.zero_margin:
            return {"nome": nome, "N": N, "lam": lam, "z": vals[:N], "w": vals[N:]}
    raise ConfigError(f"no Frobenius draw keeps the numerator {cfg.zero_margin} away from zero")


@register("frobenius.determinant", "frobenius", "elliptic Frobenius determinant", 1e-11, 50,
          sizes=((1,), (2,), (3,), (4,), (5,)), draw=_frobenius_draw, shape="particles")
def _(pt, tp):
    tp = _tp(pt, tp)
    mp = lt.ModelParams(tp, 0.0, 0.0, (), ())
    return rel(cf.frobenius_lhs(pt["lam"], pt["z"], pt["w"], mp), cf.frobenius_rhs(pt["lam"], pt["z"], pt["w"], mp))


# --------------------------------------------------------------------------
# elliptic Schur functions


SCHUR_SIZES = ((4, 2), (5, 2), (6, 3))


def _configs(pt):
    return sector_basis(pt["M"], pt["N"]).configs


@register("schur.S_wavefunction", "schur", "B-wavefunctions as elliptic Schur functions S", 1e-10, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    u, h = pt["u"], mp.h
    W = lt.wavefunctions_W(u, mp, h)
    vdm = cf.deformed_vandermonde(u, 2 * mp.p, mp)
    return max(rel(W.amplitude(c) / vdm, cf.schur_S_det(u, c, mp, h)) for c in _configs(pt))


@register("schur.T_wavefunction", "schur", "C-wavefunctions as elliptic Schur functions T", 1e-10, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    u, h = pt["u"], mp.h
    vdm = cf.deformed_vandermonde(u, -2 * mp.p, mp)
    return max(rel(lt.wavefunction_V_brute(u, c, mp, h) / vdm, cf.schur_T_det(u, c, mp, h)) for c in _configs(pt))


@register("schur.S_sum_det", "schur", "sum and determinant forms of S", 1e-11, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    return max(rel(cf.schur_S_sum(pt["u"], c, mp, mp.h), cf.schur_S_det(pt["u"], c, mp, mp.h)) for c in _configs(pt))


@register("schur.T_sum_det", "schur", "sum and determinant forms of T", 1e-11, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    return max(rel(cf.schur_T_sum(pt["u"], c, mp, mp.h), cf.schur_T_det(pt["u"], c, mp, mp.h)) for c in _configs(pt))


# --------------------------------------------------------------------------
# Cauchy


@register("cauchy.formula", "cauchy", "Cauchy formula for elliptic Schur functions", 1e-9, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    M = pt["M"]
    return rel(cf.cauchy_lhs(pt["u"], pt["w"], M, mp, mp.h), cf.cauchy_rhs(pt["u"], pt["w"], M, mp, mp.h))


@register("cauchy.triangle", "cauchy", "scalar product three ways", 1e-9, 3, sizes=SCHUR_SIZES)
def _(pt, tp):
    mp = _mp(pt, tp)
    M, u, w, h = pt["M"], pt["u"], pt["w"], mp.h
    brute = lt.scalar_product_brute(u, w, mp, h)
    det = cf.scalar_product_det(u, w, mp, h)
    weight = cf.deformed_vandermonde(u, 2 * mp.p, mp) * cf.deformed_vandermonde(w, -2 * mp.p, mp)
    csum = weight * cf.cauchy_lhs(u, w, M, mp, h)
    return max(rel(brute, det), rel(det, csum), rel(brute, csum))


# --------------------------------------------------------------------------
# wavefunction relations


def _v_lattice(us, c, mp, h):
    return lt.wavefunction_V_brute(us, c, mp, h)


def _config_draw(last_on_m: bool):
    def draw(rng, cfg, size, nome):
        pt = _model_draw(rng, cfg, size, nome)
        M, N = size
        pool = [c.positions for c in sector_basis(M, N).configs if (c.positions[-1] == M) == last_on_m]
        if not pool:
            raise ConfigError(f"no {N}-particle configuration on {M} sites with last particle {'on' if last_on_m else 'off'} site M")
        pt["c"] = list(pool[int(rng.integers(len(pool)))])
        return pt

    return draw


def _both_readings(fn, pt, tp):
    mp = _mp(pt, tp)
    c = Configuration(pt["M"], tuple(pt["c"]))
    return max(fn(pt["u"], c, mp, mp.h), fn(pt["u"], c, mp, mp.h, _v_lattice))


@register("appendix.exchange", "appendix", "reordering the C-operators", 1e-10, 5, sizes=((3, 2), (4, 3)),
          draw=_config_draw(True))
def _(pt, tp):
    mp = _mp(pt, tp)
    c = Configuration(pt["M"], tuple(pt["c"]))
    worst = 0.0
    for sigma in permutations(range(pt["N"])):
        worst = max(worst, cf.exchange_residual_V(sigma, pt["u"], c, mp, mp.h),
                    cf.exchange_residual_V(sigma, pt["u"], c, mp, mp.h, _v_lattice))
    return worst


@register("appendix.recursion", "appendix", "wavefunction recursion at the last site", 1e-10, 5, sizes=((3, 2), (4, 2)),
          draw=_config_draw(True))
def _(pt, tp):
    return _both_readings(cf.recursion_residual_V, pt, tp)


@register("appendix.factorization", "appendix", "wavefunction factorization with the last site empty", 1e-10, 5,
          sizes=((3, 2), (3, 1)), draw=_config_draw(False))
def _(pt, tp):
    return _both_readings(cf.factorization_residual_V, pt, tp)


@register("appendix.base_case", "appendix", "one-particle wavefunction, spectral bracket at power one", 1e-12, 5,
          sizes=((1, 1), (2, 1), (3, 1), (4, 1)))
def _(pt, tp):
    mp = _mp(pt, tp)
    M = pt["M"]
    u = pt["u"][0]
    return rel(cf.v_base_case(u, mp, mp.h), lt.wavefunction_V_brute([u], Configuration(M, (M,)), mp, mp.h))


@register("appendix.base_case_half_power", "appendix",
          "one-particle wavefunction, spectral bracket at power one half (negative control)",
          NEGATIVE_CONTROL_GAP, 5, sizes=((1, 1), (2, 1), (3, 1), (4, 1)), expect="differ")
def _(pt, tp):
    mp = _mp(pt, tp)
    M = pt["M"]
    u = pt["u"][0]
    return rel(cf.v_base_case(u, mp, mp.h, power=0.5), lt.wavefunction_V_brute([u], Configuration(M, (M,)), mp, mp.h))


# --------------------------------------------------------------------------
# quasi-periodicity of the interpolating functions


def _quasi_draw(rng, cfg, size, nome):
    pt = _model_draw(rng, cfg, size, nome)
    pt["y"] = [float(x) for x in rng.uniform(0.0, cfg.spectral_window, 3)]
    return pt


def _intermediate_quasi(pt, tp, evaluator) -> float:
    mp = _mp(pt, tp)
    M, N, u, w = pt["M"], pt["N"], pt["u"], pt["w"]
    worst = 0.0
    for n in range(1, N + 1):
        spec = cf.intermediate_w_spec(M, N, n, mp, mp.h)

        def f(y, n=n):
            ws = list(w[: n - 1]) + [y]
            return evaluator(u, ws, M, N, n, mp) / cf.intermediate_frozen_factor(y, M, N, n, mp)

        worst = max(worst, quasi_period_residual(f, spec, mp.theta, pt["y"]))
    return worst


@register("quasi.intermediate_lattice", "quasi", "quasi-periodicity of the intermediate product in the last C spectral parameter",
          1e-10, 3, sizes=((3, 2), (4, 2)), draw=_quasi_draw)
def _(pt, tp):
    return _intermediate_quasi(pt, tp, lambda u, ws, M, N, n, mp: lt.intermediate_sp_brute(u, ws, n, mp, mp.h))


@register("quasi.intermediate_determinant", "quasi", "quasi-periodicity of the determinant side in the last C spectral parameter",
          1e-10, 3, sizes=((3, 2), (4, 2)), draw=_quasi_draw)
def _(pt, tp):
    return _intermediate_quasi(pt, tp, lambda u, ws, M, N, n, mp: cf.intermediate_sp_det(u, ws, M, N, n, mp, mp.h, general=True))


def _vm_draw(rng, cfg, size, nome):
    pt = _config_draw(True)(rng, cfg, size, nome)
    pt["y"] = [float(x) for x in rng.uniform(0.0, cfg.spectral_window, 3)]
    return pt


@register("quasi.wavefunction_vM", "quasi", "quasi-periodicity of the C-wavefunction in the last inhomogeneity",
          1e-10, 3, sizes=((3, 2), (3, 1), (4, 2)), draw=_vm_draw)
def _(pt, tp):
    mp = _mp(pt, tp)
    M, u = pt["M"], pt["u"]
    c = Configuration(M, tuple(pt["c"]))
    spec = cf.vm_spec(u, mp, mp.h)
    worst = 0.0
    for wave in (cf.wavefunction_H, _v_lattice):
        worst = max(worst, quasi_period_residual(lambda y: wave(u, c, mp.with_v(M, y), mp.h), spec, mp.theta, pt["y"]))
    return worst


# --------------------------------------------------------------------------
# runner


def identities_for(names) -> list[Identity]:
    """Resolve suite names, identity names or 'all' into registry entries, in registry order."""
    wanted = set()
    for name in names:
        if name == "all":
            return list(REGISTRY.values())
        if name in SUITES:
            wanted |= {k for k, v in REGISTRY.items() if v.suite == name}
        elif name in REGISTRY:
            wanted.add(name)
        else:
            raise ConfigError(f"unknown suite or identity {name!r}; known suites: {', '.join(SUITES)}")
    return [v for k, v in REGISTRY.items() if k in wanted]


def sizes_for(ident: Identity, cfg: SuiteConfig) -> tuple:
    if ident.shape == "grid" and ident.sizes != ((),):
        if cfg.m is None and cfg.n is None:
            return ident.sizes
        M = cfg.m if cfg.m is not None else ident.sizes[0][0]
        N = cfg.n if cfg.n is not None else ident.sizes[0][1]
        if N > M:
            raise ConfigError(f"{ident.name}: N={N} exceeds M={M}")
        return ((M, N),)
    if ident.shape == "square":
        if cfg.n is None:
            return ident.sizes
        return ((cfg.n, cfg.n),)
    if ident.shape == "particles":
        return ident.sizes if cfg.n is None else ((cfg.n,),)
    return ident.sizes


def _nomes(ident: Identity, cfg: SuiteConfig):
    if cfg.nome is not None:
        return (cfg.nome,)
    return NOME_SWEEP if ident.sweep_nome else (DEFAULT_NOME,)


def run_identity(ident: Identity, cfg: SuiteConfig, rng: np.random.Generator) -> CheckResult:
    tol = cfg.tolerance_for(ident.name, ident.tol)
    per_size = cfg.samples or ident.samples
    nomes = _nomes(ident, cfg)
    worst, worst_pt = -1.0, None
    least = math.inf
    count = 0
    error = None
    for size in sizes_for(ident, cfg):
        for i in range(per_size):
            pt = ident.draw(rng, cfg, size, nomes[i % len(nomes)])
            try:
                res = float(ident.evaluate(pt, None))
            except (ArithmeticError, ValueError) as exc:
                res, error = math.inf, f"{type(exc).__name__}: {exc}"
            count += 1
            if not math.isfinite(res) or res > worst:
                worst, worst_pt = res, pt
            least = min(least, res)
            if not math.isfinite(res):
                break
        if error:
            break
    if ident.expect == "differ":
        passed = least > tol
    else:
        passed = math.isfinite(worst) and worst < tol
    result = CheckResult(
        identity=ident.name,
        suite=ident.suite,
        anchor=ident.anchor,
        samples=count,
        max_rel_residual=worst if math.isfinite(worst) else None,
        worst_point=worst_pt,
        tolerance=tol,
        passed=passed,
        expect=ident.expect,
        min_rel_residual=least if ident.expect == "differ" else None,
        error=error,
    )
    if not passed and ident.expect == "agree" and worst_pt is not None and error is None:
        result.triage = triage(ident, worst_pt, tol)
    return result


def triage(ident: Identity, pt: dict, tol: float) -> dict:
    """Re-evaluate at doubled theta truncation to separate truncation from formula error."""
    base = ThetaParams(pt["nome"])
    doubled = base.doubled()
    try:
        res = float(ident.evaluate(pt, doubled))
    except (ArithmeticError, ValueError) as exc:
        return {"n_max": doubled.n_max, "residual": None, "verdict": f"error: {exc}"}
    verdict = "truncation" if res < tol else "formula"
    return {"n_max": doubled.n_max, "residual": res, "verdict": verdict}


def run_suite(cfg: SuiteConfig) -> dict:
    """Run every selected identity; returns the report as a plain dict."""
    idents = identities_for(cfg.suites)
    by_suite: dict[str, list[Identity]] = {}
    for ident in idents:
        by_suite.setdefault(ident.suite, []).append(ident)
    results = []
    timing = {}
    for suite, members in by_suite.items():
        t0 = time.perf_counter()
        for ident in members:
            rng = suite_rng(cfg.seed, suite, ident.name)
            results.append(run_identity(ident, cfg, rng).as_dict())
        timing[suite] = {"wall_time_s": time.perf_counter() - t0}
    failed = [r["identity"] for r in results if not r["pass"]]
    return {
        "config": cfg.as_dict(),
        "results": results,
        "summary": {
            "pass": not failed,
            "checks": len(results),
            "failed": failed,
            "suites": timing,
        },
    }


def strip_timing(obj):
    """Copy of a report with every wall-time field removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "wall_time_s"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
