"""One check per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

import itertools
import math

import numpy as np
import pytest

from fracforms import covariant as cov
from fracforms.coords import chart, jacobian, polar_example
from fracforms.differint import DifferintSpec, differint, power_rule_oracle
from fracforms.errors import NonDiagonalizableOrder
from fracforms.exterior import ExteriorSpec, matrix_exterior_residual, poincare_residual
from fracforms.fields import parse
from fracforms.forms import FracForm, OrderSignature, dim
from fracforms.identities import run_suite
from fracforms.serialize import dumps

SEED = 20240


@pytest.fixture(scope="module")
def report():
    return run_suite(profile="fast", seed=SEED)


def outcome(n, ok, what):
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {what}")
    assert ok, what


def statuses(report, *prefixes):
    picked = {c["id"]: c["status"] for c in report["cases"] if c["id"].startswith(prefixes)}
    assert picked, prefixes
    return picked


def all_pass(report, *prefixes):
    return all(s == "pass" for s in statuses(report, *prefixes).values())


def test_criterion_01_power_rule_oracle():
    worst = 0.0
    for p, lam, x in itertools.product((0.5, 1, 2, 3), (-1.5, -0.5, 0.5, 1.5), (0.5, 1.0, 2.0)):
        want = float(power_rule_oracle(p, lam)(x))
        for scheme in ("quadrature", "grunwald"):
            got = differint(f"x1^{p}", DifferintSpec(lam, 0.0, scheme=scheme), x).value
            err = abs(got - want) / abs(want) if want != 0 else abs(got)
            worst = max(worst, err)
    outcome(1, worst <= 1e-4, f"both evaluators vs power rule, worst relative error {worst:.2e}")


def test_criterion_02_core_identities(report):
    ok = all_pass(report, "eq6-", "eq7-", "eq9-", "eq12-", "eq8-kernel")
    outcome(2, ok, "index law, inversion, kernel witness and shift identities")


def test_criterion_03_composition_with_corrections(report):
    outcome(3, all_pass(report, "eq10-", "eq11-", "eq127-composition"), "composition with corrections")


def test_criterion_04_product_rule(report):
    outcome(4, all_pass(report, "eq13-product"), "terminating product rule series")


def test_criterion_05_poincare(report):
    fields = ("x1*x2", "x1^2*x2")
    exact = max(poincare_residual(FracForm.scalar(parse(f), 2), ExteriorSpec(1.0, (0.0, 0.0)), [[0.7, 1.3]])
                for f in fields)
    ok = all_pass(report, "eq55-") and exact <= 1e-9
    outcome(5, ok, f"fractional Poincare residuals, whole-order residual {exact:.1e}")


def test_criterion_06_dimensions():
    checked = 0
    bad = 0
    for n in range(1, 6):
        for k in (1, 2):
            for mults in itertools.product(range(n + 1), repeat=k):
                sig = OrderSignature(tuple(zip((0.5, 1.0)[:k], mults)), n)
                # pick a subset of differentials for each order independently
                count = sum(1 for choice in itertools.product(range(2 ** n), repeat=k)
                            if all(bin(c).count("1") == p for c, p in zip(choice, mults)))
                bad += dim(sig) != count or len(list(sig.keys())) != count
                checked += 1
    outcome(6, bad == 0, f"dimension formula vs enumeration on {checked} signatures")


def test_criterion_07_hodge_signs(report):
    ok = all_pass(report, "eq31-32", "eq33-", "eq39-", "eq45-47")
    outcome(7, ok, "double Hodge signs and three-dimensional basis duals")


def test_criterion_08_polar_example():
    ex = polar_example(2.0, math.pi / 3)
    refs = {k: v["reference"] for k, v in ex["comparison"].items()}
    y = [1.5, 0.6]
    J1 = jacobian(chart("polar"), 1.0, y).values
    classical = np.array([[math.cos(y[1]), math.sin(y[1])], [-y[0] * math.sin(y[1]), y[0] * math.cos(y[1])]])
    gap = np.max(np.abs(J1 - classical))
    ok = (ex["residual"] <= 1e-9 and len(ex["comparison"]) == 4
          and math.isclose(refs["dx_dr"], 0.821367, abs_tol=1e-6)
          and math.isclose(refs["dx_dtheta"], -1.924501, abs_tol=1e-6)
          and gap <= 1e-8)
    outcome(8, ok, f"polar system residual {ex['residual']:.1e}, comparison emitted, classical gap {gap:.1e}")


def test_criterion_09_matrix_order(report):
    ok = all_pass(report, "eq106-108", "eq134-135", "eq136-137", "eq127-129", "eq142-143", "eq130-133",
                  "eq125-126")
    outcome(9, ok, "projectors, inverse, semigroup, similarity vs spectral, trace, integer shift, Jordan block")


def test_criterion_10_covariant(report):
    names = {"r": 1, "theta": 2}
    V = [parse("r^2*theta", names), parse("r*theta^2", names)]
    r, t = 1.5, 0.8
    d = [[float(v.diff(b).at([r, t])) for b in (1, 2)] for v in V]
    Vt = float(V[1].at([r, t]))
    want = np.array([d[0][0], d[1][0] - Vt / r])
    errs = [np.max(np.abs(cov.covariant_direct(V, chart("polar"), nu, 1, [r, t]) - want)) for nu in (0.9, 0.99, 1.0)]
    monotone = errs[0] > errs[1] > errs[2] and errs[2] <= 1e-8
    ok = monotone and all_pass(report, "eq77-", "eq78-82", "eq70-73", "eq96-")
    outcome(10, ok, "decomposition, monotone classical limit, transformation law, matrix slices")


def test_criterion_11_matrix_poincare():
    form = FracForm.scalar(parse("x1*x2"), 2)
    res = matrix_exterior_residual(form, np.diag([0.5, 1.5]), (0.0, 0.0), [[1.0, 1.5], [1.5, 0.7]])
    try:
        matrix_exterior_residual(form, [[1.0, 1.0], [0.0, 1.0]], (0.0, 0.0), [[1.0, 1.5]])
        rejected = False
    except NonDiagonalizableOrder:
        rejected = True
    ok = max(res) <= 1e-3 and rejected
    outcome(11, ok, f"per-eigenvalue residual {max(res):.1e}, defective order rejected")


def test_criterion_12_determinism(report):
    again = run_suite(profile="fast", seed=SEED)
    outcome(12, dumps(report) == dumps(again), "identity report byte-identical across runs")
