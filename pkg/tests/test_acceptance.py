"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (also collected into the pytest
terminal summary) before asserting.
"""

import math
import warnings
from pathlib import Path

import numpy as np
import pytest

from capcal.calibration import (
    MTO_SIGMA,
    MTO_TRUTH,
    Dataset,
    PiezoCalibration,
    SynthSpec,
    chi_squared,
    fit_linear,
    generate_synthetic,
    make_family,
    mto_design,
    piezo_to_separation,
    refit_power_law_constants,
)
from capcal.constants import FOUR_PI_EPS0, NM, PF, PF_PER_UM, UM
from capcal.models import (
    MTO_SPHERE,
    REFERENCE_LENS,
    ModifiedLens,
    ModifiedLensGeometry,
    PowerLaw,
    SphereGeometry,
    effective_exponent,
    evaluate_model,
    exact_capacitance,
    exact_force_norm,
    expansion_force_norm,
    modified_force_norm,
    pfa_capacitance,
    pfa_force_norm,
)
from capcal.numerics import central_derivative, regularized_gamma_q, weighted_linear_least_squares
from capcal.tables import comparison_table
from conftest import ACCEPTANCE_LINES

pytestmark = [pytest.mark.acceptance, pytest.mark.filterwarnings("ignore::capcal.errors.ValidityWarning")]

# d (um), C exact / PFA / expansion (pF), -F/(V-V0)^2 exact / PFA / expansion (pF/m)
REFERENCE_TABLE = np.array([
    [0.5, 0.06371, 0.04808, 0.06360, 8350.23, 8417.21, 8355.18],
    [1.0, 0.05794, 0.04225, 0.05770, 4148.06, 4208.60, 4149.75],
    [1.5, 0.05458, 0.03884, 0.05423, 2748.97, 2805.74, 2749.56],
    [2.0, 0.05222, 0.03641, 0.05176, 2050.22, 2104.30, 2050.40],
    [2.5, 0.05039, 0.03454, 0.04983, 1631.44, 1683.44, 1631.47],
    [3.0, 0.04891, 0.03300, 0.04824, 1352.56, 1402.87, 1352.56],
    [3.5, 0.04766, 0.03170, 0.04689, 1153.59, 1202.46, 1153.58],
    [4.0, 0.04659, 0.03058, 0.04572, 1004.54, 1052.15, 1004.53],
])

A1_TRUE = 72.32971 * PF
A2_TRUE = 2.18e-4 * PF_PER_UM


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rel(a, b):
    return abs(a / b - 1.0)


def test_criterion_01_comparison_table():
    compat = np.array(comparison_table(table_compat=True))
    printed = np.array(comparison_table(table_compat=False))
    dev = np.abs(compat[:, 1:] / REFERENCE_TABLE[:, 1:] - 1)
    worst_other = float(np.max(np.delete(dev, 2, axis=1)))
    worst_col4_compat = float(np.max(dev[:, 2]))
    dev_printed = np.abs(printed[:, 3] / REFERENCE_TABLE[:, 3] - 1)
    worst_printed = float(np.max(dev_printed))
    ok = worst_other <= 2e-4 and worst_col4_compat <= 2e-4 and worst_printed <= 0.02
    report(
        1, ok,
        f"max rel dev cols 2,3,5,6,7 = {worst_other:.2e}; col 4 compat = {worst_col4_compat:.2e}; "
        f"col 4 as printed = {worst_printed:.2%} (at d = {REFERENCE_TABLE[int(np.argmax(dev_printed)), 0]} um)",
    )


def test_criterion_02_expansion_force_accuracy():
    ds = np.geomspace(0.5, 4.0, 100) * UM
    dev = max(rel(expansion_force_norm(float(d), MTO_SPHERE), exact_force_norm(float(d), MTO_SPHERE)) for d in ds)
    report(2, dev <= 7e-4, f"max |expansion/exact - 1| over [0.5, 4] um = {dev:.4%} (limit 0.07%)")


def test_criterion_03_error_profile():
    s = MTO_SPHERE
    c_lo = 1 - pfa_capacitance(0.5 * UM, s) / exact_capacitance(0.5 * UM, s)
    c_hi = 1 - pfa_capacitance(4 * UM, s) / exact_capacitance(4 * UM, s)
    f_lo = rel(pfa_force_norm(0.5 * UM, s), exact_force_norm(0.5 * UM, s))
    f_hi = rel(pfa_force_norm(4 * UM, s), exact_force_norm(4 * UM, s))
    e_lo = rel(expansion_force_norm(0.5 * UM, s), exact_force_norm(0.5 * UM, s))
    e_hi = rel(expansion_force_norm(4 * UM, s), exact_force_norm(4 * UM, s))
    ok = (
        abs(c_lo - 0.245) <= 0.003 and abs(c_hi - 0.344) <= 0.003
        and abs(f_lo - 0.008) <= 0.001 and abs(f_hi - 0.047) <= 0.001
        and e_lo <= 6e-4 and e_hi <= 5e-5
    )
    report(
        3, ok,
        f"PFA C error {c_lo:.2%} -> {c_hi:.2%}; PFA F error {f_lo:.2%} -> {f_hi:.2%}; "
        f"expansion F error {e_lo:.4%} / {e_hi:.4%}",
    )


def test_criterion_04_mto_round_trip():
    fam = make_family("exact-parasitic")
    design = mto_design()
    within, red = 0, []
    for seed in range(100):
        fit = fit_linear(generate_synthetic(SynthSpec(MTO_TRUTH, design, MTO_SIGMA, seed)), fam)
        red.append(fit.reduced_chi2)
        if abs(fit.params["a1"] - A1_TRUE) <= 3 * fit.sigmas["a1"] and abs(fit.params["a2"] - A2_TRUE) <= 3 * fit.sigmas["a2"]:
            within += 1
    mean = float(np.mean(red))
    fixed = fit_linear(generate_synthetic(SynthSpec(MTO_TRUTH, design, MTO_SIGMA, 42)), fam)
    ok = within >= 95 and 0.95 <= mean <= 1.05 and 0.78 <= fixed.reduced_chi2 <= 1.25 and 0.05 <= fixed.p_value <= 1
    report(
        4, ok,
        f"{within}/100 seeds within 3 sigma; pooled reduced chi2 = {mean:.4f}; "
        f"seed 42: reduced chi2 = {fixed.reduced_chi2:.4f}, p = {fixed.p_value:.4f}",
    )


def test_criterion_05_pfa_offset():
    ds = generate_synthetic(SynthSpec(MTO_TRUTH, mto_design(), MTO_SIGMA, 0, noise_sigma=0.0))
    shift = fit_linear(ds, make_family("pfa-parasitic")).params["a1"] - fit_linear(ds, make_family("exact-parasitic")).params["a1"]
    report(5, 0.0140 * PF <= shift <= 0.0172 * PF, f"PFA-family a1 shift = {shift / PF:.5f} pF (band [0.0140, 0.0172])")


def test_criterion_06_anomalous_exponent():
    p_mod, _, _ = effective_exponent(lambda d: modified_force_norm(d, REFERENCE_LENS), 30 * NM, 100 * NM)
    p_pfa, _, _ = effective_exponent(lambda d: pfa_force_norm(d, MTO_SPHERE), 30 * NM, 100 * NM)
    ok = 1.6 <= p_mod <= 1.8 and abs(p_pfa - 2) <= 1e-6
    report(6, ok, f"modified lens exponent = {p_mod:.4f}; PFA exponent = {p_pfa:.9f}")


def test_criterion_07_power_law_constants():
    a1, a3 = refit_power_law_constants(REFERENCE_LENS, 30 * NM, 100 * NM)
    d1, d3 = rel(a1, 32.804 * PF), rel(a3, -360.48 * PF)
    report(
        7, d1 <= 0.05 and d3 <= 0.05,
        f"A1 = {a1 / PF:.4f} pF ({d1:.2%} off), A3 = {a3 / PF:.3f} pF ({d3:.2%} off); limit 5%",
    )


def test_criterion_08_capacitance_at_zero_piezo_voltage():
    d_mod = piezo_to_separation(0.0, PiezoCalibration(87 * NM, 69.93))
    d_pow = piezo_to_separation(0.0, PiezoCalibration(87 * NM, 68.43))
    c_mod = evaluate_model(ModifiedLens(REFERENCE_LENS, 197.69 * PF), d_mod) / PF
    c_pow = evaluate_model(PowerLaw(222.96 * PF, -346.2 * PF), d_pow) / PF
    ok = abs(c_mod - 214.20) <= 0.02 and abs(c_pow - 213.59) <= 0.02
    report(8, ok, f"modified lens = {c_mod:.4f} pF (214.20); power law = {c_pow:.4f} pF (213.59)")


def _property_checks() -> dict[str, bool]:
    s = MTO_SPHERE
    out = {}
    out["scaling law"] = all(
        rel(exact_capacitance(lam * r * s.radius, SphereGeometry(lam * s.radius)), lam * exact_capacitance(r * s.radius, s)) <= 1e-12
        for lam in (0.5, 2.0, 10.0) for r in (1e-3, 0.05, 0.5)
    )
    ds = np.geomspace(1e-3, 2.0, 40) * s.radius
    out["monotonicity"] = bool(
        np.all(np.diff([exact_capacitance(float(d), s) for d in ds]) < 0)
        and np.all(np.diff([exact_force_norm(float(d), s) for d in ds]) < 0)
    )
    out["half-derivative"] = all(
        rel(-0.5 * central_derivative(lambda x: exact_capacitance(x, s), float(d)), exact_force_norm(float(d), s)) <= 1e-6
        for d in np.geomspace(1e-3, 1.0, 7) * s.radius
    )
    out["isolated sphere"] = all(rel(exact_capacitance(k * s.radius, s), FOUR_PI_EPS0 * s.radius) <= 1e-3 for k in (1e3, 1e4))
    flat = ModifiedLensGeometry(r=s.radius, r1=s.radius, r2=s.radius, h_small=8e-9, h_large=250e-9)
    out["lens -> PFA"] = all(rel(modified_force_norm(d, flat), pfa_force_norm(d, s)) <= 1e-14 for d in (30e-9, 1e-6, 5e-6))
    out["Q(1,x) = exp(-x)"] = all(abs(regularized_gamma_q(1.0, x) - math.exp(-x)) <= 1e-12 for x in np.linspace(0, 50, 101))
    rng = np.random.default_rng(0)
    a = np.column_stack([np.ones(30), rng.uniform(0, 1, 30)])
    y = a @ [1.0, 2.0] + rng.normal(0, 0.1, 30)
    w1 = weighted_linear_least_squares(a, y, np.full(30, 0.1))
    w3 = weighted_linear_least_squares(a, y, np.full(30, 0.3))
    out["WLS sigma scaling"] = (
        np.allclose(w1.params, w3.params, rtol=1e-12)
        and rel(w3.residual_chi2, w1.residual_chi2 / 9) <= 1e-10
        and np.allclose(np.sqrt(np.diag(w3.covariance)), 3 * np.sqrt(np.diag(w1.covariance)), rtol=1e-10)
    )
    ds_ = generate_synthetic(SynthSpec(MTO_TRUTH, mto_design(), MTO_SIGMA, 3))
    perm = np.random.default_rng(1).permutation(len(ds_))
    shuffled = Dataset(ds_.kind, tuple(ds_.points[i] for i in perm))
    out["chi2 permutation"] = chi_squared(shuffled, MTO_TRUTH).chi2 == chi_squared(ds_, MTO_TRUTH).chi2
    out["seed determinism"] = ds_ == generate_synthetic(SynthSpec(MTO_TRUTH, mto_design(), MTO_SIGMA, 3))
    return out


def test_criterion_09_property_suites():
    checks = _property_checks()
    failed = [k for k, v in checks.items() if not v]
    report(9, not failed, f"{len(checks) - len(failed)}/{len(checks)} property checks green" + (f"; failing: {', '.join(failed)}" if failed else ""))


def test_criterion_10_non_reproducibility_note():
    readme = Path(__file__).resolve().parents[1] / "README.md"
    text = readme.read_text(encoding="utf-8") if readme.exists() else ""
    ok = "Not reproducible" in text and all(v in text for v in ("715", "1100", "0.7"))
    report(10, ok, "README documents that the measured-data reduced chi2 values (715, 1100, 0.7) cannot be reproduced; synthetic round-trips substitute")
