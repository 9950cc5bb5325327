"""Validation harness: report plumbing, preconditions, and small scenario
runs of every check.  The default (slow) scenarios are exercised by the
acceptance suite; here the point is that the checks compute what they say
on reduced versions and reject malformed scenarios.
"""

from dataclasses import asdict

import json
import numpy as np
import pytest

from kinsirs.validation import (AbmMeanFieldScenario, ClosureScenario,
                                DecayScenario, EpsilonScenario,
                                HomogeneousScenario, LpScenario, _mean_field_map,
                                abm_vs_ode, available_checks,
                                closure_consistency, decay_certificate,
                                epsilon_convergence, homogeneous_consistency,
                                lp_bound_check, run_check, scenario_hash)


def test_reports_are_reproducible():
    sc = ClosureScenario(n_velocities=16, grid_n=2)
    a = closure_consistency(sc)
    b = closure_consistency(sc)
    da, db = asdict(a), asdict(b)
    # wall-clock time is the only field allowed to differ
    da.pop("runtime_s"), db.pop("runtime_s")
    assert da == db
    assert a.config_hash == b.config_hash
    # the JSON form round-trips
    assert json.loads(a.to_json())["config_hash"] == a.config_hash
    assert any(line.endswith("PASS") for line in a.summary_lines())


def test_scenario_hash_is_content_addressed():
    h1 = scenario_hash({"a": 1}, {"tol": 0.5}, seed=3)
    h2 = scenario_hash({"a": 1}, {"tol": 0.5}, seed=3)
    h3 = scenario_hash({"a": 2}, {"tol": 0.5}, seed=3)
    assert h1 == h2 and h1 != h3
    assert len(h1) == 16 and all(c in "0123456789abcdef" for c in h1)


def test_homogeneous_short_run_passes():
    rep = homogeneous_consistency(HomogeneousScenario(t_end=0.5))
    assert rep.passed
    assert rep.metrics["max_rel_deviation"] <= 1e-4
    assert set(rep.metrics) >= {"dev_kinetic_meso", "dev_kinetic_sirs",
                                "dev_meso_sirs"}


def test_epsilon_preconditions():
    with pytest.raises(ValueError, match="three"):
        epsilon_convergence(EpsilonScenario(eps_list=(0.4, 0.2)))
    with pytest.raises(ValueError, match="decreasing"):
        epsilon_convergence(EpsilonScenario(eps_list=(0.2, 0.3, 0.1)))


def test_epsilon_small_run_structure():
    sc = EpsilonScenario(grid_n=16, n_velocities=8,
                         eps_list=(0.8, 0.6, 0.45), t_end=0.25)
    rep = epsilon_convergence(sc)
    assert len(rep.rows) == 3
    for row in rep.rows:
        assert row["n_steps"] >= 1
        assert np.isfinite(row["err_per_dim"]) and row["err_per_dim"] > 0
        assert np.isfinite(row["err_scalar"]) and row["err_scalar"] > 0
    assert {"order_per_dim", "order_scalar", "order_better",
            "monotone_better"} <= set(rep.metrics)
    # at these coarse eps the errors must at least shrink
    errs = [row["err_per_dim"] for row in rep.rows]
    assert errs[0] > errs[-1]


def test_decay_requires_subthreshold_rates():
    with pytest.raises(ValueError, match="subcritical"):
        decay_certificate(DecayScenario(beta=0.6, gamma=0.5))


def test_decay_small_run_certifies():
    sc = DecayScenario(grid_n=16, n_velocities=8, t_end=4.0, tail_from=2.0)
    rep = decay_certificate(sc, rate_min=0.1)
    assert rep.passed
    assert rep.metrics["monotone_kinetic"] == 1.0
    assert rep.metrics["monotone_meso"] == 1.0
    assert rep.metrics["tail_rate_kinetic"] >= 0.1
    assert rep.metrics["tail_rate_meso"] >= 0.1


def test_lp_rejects_uncovered_orders():
    with pytest.raises(ValueError, match="p in"):
        lp_bound_check(LpScenario(p_orders=(3.0,)))


def test_lp_small_run_passes():
    sc = LpScenario(grid_n=8, n_velocities=4, t_end=1.0)
    rep = lp_bound_check(sc)
    assert rep.passed
    for p in (2, 4):
        for c in ("S", "I", "R"):
            assert rep.metrics[f"max_ratio_{c}_p{p}"] <= 1.0
    assert rep.metrics["contraction_ratio"] <= 1.0


def test_mean_field_map_geometric_decay():
    # p_transmit = 0 turns the map into pure recovery: I halves each step
    out = _mean_field_map(100.0, 64.0, 0.0, 0.0, 0.5, 0.0, 6)
    assert out[:, 1].tolist() == [64.0, 32.0, 16.0, 8.0, 4.0, 2.0, 1.0]
    assert np.all(out[:, 0] == 100.0)
    np.testing.assert_allclose(out.sum(axis=1), 164.0, rtol=1e-15)


def test_abm_reduced_ensemble_tracks_the_map():
    sc = AbmMeanFieldScenario(n_agents=800, i0=15, p_transmit=3e-4,
                              n_steps=40, n_seeds=12, seed=4)
    rep = abm_vs_ode(sc)
    assert rep.passed
    assert rep.metrics["max_allowance_ratio"] <= 1.0
    assert len(rep.rows) == 41
    # the continuous-time comparison is informational but should be close
    assert rep.metrics["dev_vs_ode"] < 0.05


def test_run_check_dispatch():
    assert available_checks() == ["abm", "closure", "decay", "epsilon",
                                  "homogeneous", "lp"]
    with pytest.raises(ValueError, match="unknown check"):
        run_check("bogus")
    with pytest.raises(ValueError, match="unknown scenario fields"):
        run_check("closure", {"scenario": {"grid_n": 2, "bogus": 1}})
    rep = run_check("closure", {"scenario": {"n_velocities": 16, "grid_n": 2}})
    assert rep.name == "closure_consistency"
    assert rep.passed
