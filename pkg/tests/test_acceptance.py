"""Acceptance criteria 1-11, one test each.

Every test records a PASS/FAIL line that is printed in the terminal summary.
Each suite runs at the default seed through the same harness the CLI uses.
"""

import json
import time

import pytest

import felderhof.closedforms as cf
from conftest import record_criterion
from felderhof.harness import golden
from felderhof.harness.checks import run_suite, strip_timing
from felderhof.harness.sampler import SuiteConfig, model_from_point, sample_safe_params, suite_rng
from felderhof.lattice import intermediate_sp_brute, scalar_product_brute


def _run(suites, **kw):
    t0 = time.perf_counter()
    report = run_suite(SuiteConfig(suites=tuple(suites), **kw))
    return report, time.perf_counter() - t0


def _worst(reports):
    vals = [r["max_rel_residual"] for rep in reports for r in rep["results"] if r["expect"] == "agree"]
    return max(v if v is not None else float("inf") for v in vals)


def _failed(reports):
    return [name for rep in reports for name in rep["summary"]["failed"]]


def _conclude(number, ok, detail):
    record_criterion(number, ok, detail)
    assert ok, detail


def test_criterion_01_theta_quasi_periods():
    reports, elapsed = [], 0.0
    for nome in (0.05, 0.1, 0.2):
        rep, t = _run(["theta.period_one", "theta.period_tau"], nome=nome, samples=200)
        reports.append(rep)
        elapsed += t
    samples = {r["samples"] for rep in reports for r in rep["results"]}
    ok = not _failed(reports) and samples == {200} and _worst(reports) < 1e-12 and elapsed < 1.0
    _conclude(1, ok, f"theta quasi-periods: worst {_worst(reports):.1e} < 1e-12, {elapsed:.2f} s < 1 s")


def test_criterion_02_dynamical_ybe():
    rep, elapsed = _run(["ybe.dynamical"], samples=100)
    ok = not _failed([rep]) and rep["results"][0]["samples"] == 100 and _worst([rep]) < 1e-11 and elapsed < 2.0
    _conclude(2, ok, f"dynamical YBE: worst {_worst([rep]):.1e} < 1e-11, {elapsed:.2f} s < 2 s")


def test_criterion_03_domain_wall():
    rep, elapsed = _run(["dwbp.factorized"], samples=20)
    ok = not _failed([rep]) and rep["results"][0]["samples"] == 80 and _worst([rep]) < 1e-10 and elapsed < 5.0
    _conclude(3, ok, f"domain wall N=1..4: worst {_worst([rep]):.1e} < 1e-10, {elapsed:.2f} s < 5 s")


def test_criterion_04_scalar_products():
    rep, elapsed = _run(["scalar.determinant"], samples=10)
    ok = not _failed([rep]) and rep["results"][0]["samples"] == 40 and _worst([rep]) < 1e-9 and elapsed < 30.0
    _conclude(4, ok, f"scalar products: worst {_worst([rep]):.1e} < 1e-9, {elapsed:.2f} s < 30 s")


def test_criterion_05_intermediate_products():
    rep, elapsed = _run(["intermediate.determinant"])
    # n = N must reproduce the scalar-product values exactly on the same inputs
    mismatches = 0
    for M, N in ((4, 2), (5, 3)):
        rng = suite_rng(0, "acceptance", f"top-{M}-{N}")
        for _ in range(5):
            s = sample_safe_params(M, N, rng)
            mp, h = s.mp, s.mp.h
            mismatches += cf.intermediate_sp_det(s.u, s.w, M, N, N, mp, h) != cf.scalar_product_det(s.u, s.w, mp, h)
            mismatches += intermediate_sp_brute(s.u, s.w, N, mp, h) != scalar_product_brute(s.u, s.w, mp, h)
    ok = not _failed([rep]) and _worst([rep]) < 1e-9 and mismatches == 0 and elapsed < 30.0
    _conclude(5, ok, f"intermediate products all n: worst {_worst([rep]):.1e} < 1e-9, n=N bit mismatches {mismatches}, {elapsed:.2f} s < 30 s")


def test_criterion_06_recursion_bottom_and_c_element():
    rec, _ = _run(["intermediate.recursion"], m=4, n=2)
    bottom, _ = _run(["intermediate.n0_forms"])
    elem, _ = _run(["intermediate.c_element"])
    worst = (_worst([rec]), _worst([bottom]), _worst([elem]))
    ok = not _failed([rec, bottom, elem]) and worst[0] < 1e-10 and worst[1] < 1e-11 and worst[2] < 1e-12
    _conclude(6, ok, f"recursion {worst[0]:.1e} < 1e-10, n=0 forms {worst[1]:.1e} < 1e-11, C element {worst[2]:.1e} < 1e-12")


def test_criterion_07_frobenius():
    rep, _ = _run(["frobenius.determinant"], samples=50)
    ok = not _failed([rep]) and rep["results"][0]["samples"] == 250 and _worst([rep]) < 1e-11
    _conclude(7, ok, f"Frobenius N<=5: worst {_worst([rep]):.1e} < 1e-11")


def test_criterion_08_schur():
    wave, _ = _run(["schur.S_wavefunction", "schur.T_wavefunction"])
    forms, _ = _run(["schur.S_sum_det", "schur.T_sum_det"])
    ok = not _failed([wave, forms]) and _worst([wave]) < 1e-10 and _worst([forms]) < 1e-11
    _conclude(8, ok, f"Schur: wavefunctions {_worst([wave]):.1e} < 1e-10, sum vs det {_worst([forms]):.1e} < 1e-11")


def test_criterion_09_cauchy():
    rep, _ = _run(["cauchy"])
    ok = not _failed([rep]) and _worst([rep]) < 1e-9
    _conclude(9, ok, f"Cauchy formula and triangle: worst {_worst([rep]):.1e} < 1e-9")


def test_criterion_10_appendix_and_quasi_periodicity():
    rels, _ = _run(["appendix.exchange", "appendix.recursion", "appendix.factorization"], m=3, n=2)
    base, _ = _run(["appendix.base_case", "appendix.base_case_half_power"])
    quasi, _ = _run(["quasi"])
    half = next(r for r in base["results"] if r["expect"] == "differ")
    ok = (
        not _failed([rels, base, quasi])
        and _worst([rels]) < 1e-10
        and _worst([quasi]) < 1e-10
        and half["min_rel_residual"] > 1e-3
    )
    _conclude(
        10,
        ok,
        f"wavefunction relations {_worst([rels]):.1e} < 1e-10, base case {_worst([base]):.1e}, "
        f"half-power reading off by >= {half['min_rel_residual']:.1e}, quasi-periodicity {_worst([quasi]):.1e} < 1e-10",
    )


def test_criterion_11_determinism(tmp_path):
    cfg = SuiteConfig(suites=("all",), samples=2, seed=5)
    a = json.dumps(strip_timing(run_suite(cfg)), sort_keys=True)
    b = json.dumps(strip_timing(run_suite(cfg)), sort_keys=True)
    path = golden.generate(tmp_path / "one")
    again = golden.generate(tmp_path / "two")
    ok = a == b and golden.check(path) == [] and path.read_bytes() == again.read_bytes()
    _conclude(11, ok, "identical reports for identical seeds; golden fixtures regenerate and check exactly")


@pytest.mark.parametrize("name", ["dwbp_N2", "scalar_M4_N2"])
def test_golden_points_are_safe(name, tmp_path):
    entry = next(e for e in json.loads(golden.generate(tmp_path).read_text()) if e["name"] == name)
    mp = model_from_point(entry["params"])
    assert 0.02 < mp.h and mp.h + 4 * len(entry["params"]["u"]) * mp.p + 2 * sum(mp.qs) < 0.98
