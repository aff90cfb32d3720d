"""Golden fixtures: brute-force lattice values with full parameter provenance.

A fixture file is a JSON array of entries
``{name, params, value_re, value_im, oracle, truncation}``.  ``check``
recomputes each entry from its stored params, so it never depends on the RNG.
"""

from __future__ import annotations

import json
from pathlib import Path

from .. import lattice as lt
from ..statespace import Configuration
from ..theta import ThetaParams, bracket
from .sampler import model_from_point, sample_safe_params, suite_rng

FIXTURE_NAME = "golden.json"
CHECK_TOL = 1e-12


def _evaluate(oracle: str, params: dict) -> complex:
    if oracle == "bracket":
        return bracket(params["t"], ThetaParams(params["nome"]))
    mp = model_from_point(params)
    h = mp.h
    if oracle == "dwbp_brute":
        return lt.dwbp_brute(params["u"], mp, h)
    if oracle == "scalar_product_brute":
        return lt.scalar_product_brute(params["u"], params["w"], mp, h)
    if oracle == "intermediate_sp_brute":
        n = params["n"]
        return lt.intermediate_sp_brute(params["u"], params["w"][:n], n, mp, h)
    if oracle == "wavefunction_W_brute":
        return lt.wavefunction_W_brute(params["u"], Configuration(mp.M, tuple(params["c"])), mp, h)
    if oracle == "wavefunction_V_brute":
        return lt.wavefunction_V_brute(params["u"], Configuration(mp.M, tuple(params["c"])), mp, h)
    raise ValueError(f"unknown oracle {oracle!r}")


# (name, oracle, M, N, extra params)
_PLAN = [
    ("bracket_0.37", "bracket", None, None, {"t": 0.37}),
    ("dwbp_N2", "dwbp_brute", 2, 2, {}),
    ("dwbp_N3", "dwbp_brute", 3, 3, {}),
    ("scalar_M4_N2", "scalar_product_brute", 4, 2, {}),
    ("scalar_M6_N3", "scalar_product_brute", 6, 3, {}),
    ("intermediate_M5_N3_n1", "intermediate_sp_brute", 5, 3, {"n": 1}),
    ("intermediate_M5_N3_n2", "intermediate_sp_brute", 5, 3, {"n": 2}),
    ("W_M4_N2_c13", "wavefunction_W_brute", 4, 2, {"c": [1, 3]}),
    ("W_M5_N2_c25", "wavefunction_W_brute", 5, 2, {"c": [2, 5]}),
    ("V_M4_N2_c24", "wavefunction_V_brute", 4, 2, {"c": [2, 4]}),
    ("V_M5_N3_c135", "wavefunction_V_brute", 5, 3, {"c": [1, 3, 5]}),
]


def build_fixtures(seed: int = 0, nome: float = 0.1) -> list[dict]:
    rng = suite_rng(seed, "golden")
    tp = ThetaParams(nome)
    out = []
    for name, oracle, M, N, extra in _PLAN:
        if M is None:
            params = {"nome": nome} | extra
        else:
            params = sample_safe_params(M, N, rng, nome=nome).point() | extra
        val = _evaluate(oracle, params)
        out.append(
            {
                "name": name,
                "params": params,
                "value_re": val.real,
                "value_im": val.imag,
                "oracle": oracle,
                "truncation": {"n_max": tp.n_max, "trunc_tol": tp.trunc_tol},
            }
        )
    return out


def fixture_path(path) -> Path:
    p = Path(path)
    return p / FIXTURE_NAME if p.suffix != ".json" else p


def generate(path, seed: int = 0, nome: float = 0.1) -> Path:
    target = fixture_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(build_fixtures(seed, nome), indent=2) + "\n")
    return target


def check(path, tol: float = CHECK_TOL) -> list[str]:
    """Recompute every entry; returns the names that diverge (empty on success)."""
    target = fixture_path(path)
    if not target.exists():
        raise FileNotFoundError(f"no fixture file at {target}")
    entries = json.loads(target.read_text())
    bad = []
    for e in entries:
        stored = complex(e["value_re"], e["value_im"])
        fresh = _evaluate(e["oracle"], e["params"])
        scale = max(abs(stored), abs(fresh))
        if scale and abs(fresh - stored) / scale >= tol:
            bad.append(e["name"])
    return bad
