"""Integrated distribution functions and convex-order dominance."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subuniform import (IntegratedDF, RngStream, SubUniformDist, beta22_idf, dominates_cx,
                        mean_of, p2alpha, uniform_idf)

GRID = np.linspace(0.0, 1.0, 2049)


def test_evaluate_uniform():
    phi = uniform_idf()
    assert phi.evaluate(0.5) == pytest.approx(0.125, abs=1e-15)
    assert phi.evaluate(1.0) == pytest.approx(0.5, abs=1e-15)
    assert phi.evaluate(-1e6) == 0.0
    # beyond support phi grows linearly with slope 1
    assert phi.evaluate(2.0) == pytest.approx(1.5, abs=1e-12)


def test_evaluate_p2alpha_quarter():
    # F jumps to 0.5 at the atom 0.25 and stays flat until 0.5
    phi = p2alpha(0.25).idf()
    assert phi.evaluate(0.5) == pytest.approx(0.125, abs=1e-12)
    assert phi.evaluate(0.25) == pytest.approx(0.0, abs=1e-12)
    assert phi.evaluate(1.0) == pytest.approx(0.5, abs=1e-12)
    assert phi.evaluate(-1e6) == 0.0


def test_right_derivative_is_cdf():
    assert uniform_idf().right_derivative(0.3) == pytest.approx(0.3, abs=1e-12)
    # right-continuous at the atom: value after the jump
    assert p2alpha(0.25).idf().right_derivative(0.25) == pytest.approx(0.5, abs=1e-12)
    assert uniform_idf().right_derivative(1e6) == 1.0
    assert beta22_idf().right_derivative(-5.0) == 0.0


def test_validate_accepts_builtins():
    for phi in (uniform_idf(), beta22_idf(), p2alpha(0.1).idf()):
        rep = phi.validate()
        assert rep.ok, rep


def test_validate_flags_decreasing_cdf():
    bad = IntegratedDF(kind="piecewise", breakpoints=np.array([0.0, 0.5, 1.0]),
                       cdf=np.array([0.2, 0.8, 0.5]))
    rep = bad.validate()
    assert not rep.ok
    assert rep.property in ("convexity", "monotonicity")


def test_validate_flags_derivative_range():
    bad = IntegratedDF(kind="piecewise", breakpoints=np.array([0.0, 1.0]),
                       cdf=np.array([0.5, 1.2]))
    rep = bad.validate()
    assert not rep.ok
    assert rep.property == "derivative-range"


def test_dominates_cx_p2alpha_below_uniform():
    res = dominates_cx(p2alpha(0.1).idf(), uniform_idf())
    assert res.holds
    res = dominates_cx(uniform_idf(), uniform_idf())
    assert res.holds


def test_dominates_cx_witness_at_atom():
    # phi_U(alpha) = alpha^2/2 > 0 = phi of the mixture, maximal gap at the atom
    res = dominates_cx(uniform_idf(), p2alpha(0.25).idf())
    assert not res.holds
    assert res.witness == pytest.approx(0.25, abs=0.01)
    assert res.max_violation == pytest.approx(0.25 ** 2 / 2.0, abs=1e-6)


def test_dominates_cx_rejects_mean_mismatch():
    shifted = IntegratedDF.from_atoms([0.6], [1.0])  # mean 0.6, phi below uniform's
    res = dominates_cx(shifted, uniform_idf())
    assert not res.holds


def test_dominance_both_ways_implies_near_equality():
    # midpoint discretization of the uniform: IDF gap is w^2/8 per cell
    w = 1e-4
    mids = np.arange(w / 2.0, 1.0, w)
    disc = IntegratedDF.from_atoms(mids, np.full(mids.size, w))
    tol = 1e-8
    assert dominates_cx(disc, uniform_idf(), tol=tol).holds
    assert dominates_cx(uniform_idf(), disc, tol=tol).holds
    gap = np.abs(disc.evaluate(GRID) - uniform_idf().evaluate(GRID))
    assert gap.max() <= 2.0 * tol


def test_from_samples_small_cases():
    phi = IntegratedDF.from_samples([0.5])
    for x in (-1.0, 0.25, 0.5, 0.75, 2.0):
        assert phi.evaluate(x) == pytest.approx(max(0.0, x - 0.5), abs=1e-15)
    assert IntegratedDF.from_samples([0.0, 1.0]).evaluate(1.0) == pytest.approx(0.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=30),
       st.floats(min_value=-0.5, max_value=1.5))
def test_from_samples_formula(vals, x):
    # phi(x) = (1/n) sum max(0, x - v_i)
    phi = IntegratedDF.from_samples(vals)
    direct = np.mean(np.maximum(0.0, x - np.asarray(vals)))
    assert phi.evaluate(x) == pytest.approx(direct, abs=1e-12)


def test_from_samples_uniform_converges():
    gen = RngStream(seed=5).generator()
    phi = IntegratedDF.from_samples(gen.random(1_000_000))
    dev = np.abs(phi.evaluate(GRID) - GRID ** 2 / 2.0)
    assert dev.max() <= 0.002


def test_from_samples_matches_analytic_for_every_family_member():
    dists = [SubUniformDist("uniform01"), SubUniformDist("beta22"),
             p2alpha(0.1), p2alpha(0.25), p2alpha(0.4)]
    for i, dist in enumerate(dists):
        samp = dist.sample(RngStream(seed=60 + i).generator(), 100_000)
        emp = IntegratedDF.from_samples(samp)
        dev = np.abs(emp.evaluate(GRID) - dist.idf().evaluate(GRID))
        assert dev.max() <= 0.01, dist.variant


def test_mean_of():
    assert mean_of(uniform_idf()) == pytest.approx(0.5, abs=1e-12)
    assert mean_of(p2alpha(0.1).idf()) == pytest.approx(0.5, abs=1e-12)
    assert mean_of(beta22_idf()) == pytest.approx(0.5, abs=1e-12)
    assert mean_of(IntegratedDF.from_atoms([0.37], [1.0])) == pytest.approx(0.37, abs=1e-12)


def test_right_derivative_monotone():
    for phi in (uniform_idf(), beta22_idf(), p2alpha(0.05).idf(),
                IntegratedDF.from_samples(RngStream(seed=3).generator().random(500))):
        f = phi.right_derivative(GRID)
        assert np.all(np.diff(f) >= -1e-12)
        assert np.all((f >= 0.0) & (f <= 1.0))


@settings(max_examples=150, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
def test_evaluate_convex(a, b):
    for phi in (beta22_idf(), p2alpha(0.15).idf()):
        mid = phi.evaluate((a + b) / 2.0)
        assert mid <= (phi.evaluate(a) + phi.evaluate(b)) / 2.0 + 1e-12


def test_json_round_trip():
    for phi in (uniform_idf(), beta22_idf(), p2alpha(0.1).idf(),
                IntegratedDF.from_samples([0.2, 0.4, 0.9])):
        text = phi.to_json()
        doc = json.loads(text)
        assert doc["kind"] in ("piecewise", "analytic")
        back = IntegratedDF.from_json(text)
        assert np.allclose(back.evaluate(GRID), phi.evaluate(GRID), atol=1e-12)
        assert back.mean() == pytest.approx(phi.mean(), abs=1e-12)
