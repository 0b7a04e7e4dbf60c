"""Experiment harness: power-law fits, window trimming, configs, suites."""

import json
import math

import numpy as np
import pytest

from nlsmooth import harness
from nlsmooth.exponents import INF
from nlsmooth.harness import (
    Report,
    config_hash,
    exponents_from_query,
    fit_power_law,
    initial_condition,
    predicted_alpha,
    smooth_bump,
    spec_from_config,
    time_grid_from_config,
    usable_window,
)
from nlsmooth.measure import GridFunction, lq_norm
from nlsmooth.operators import Grid, barenblatt_on_grid
from nlsmooth.semigroup import Trajectory

FIT_TOLERANCE = 1e-10
NOISE_TOLERANCE = 0.02


# ---------------------------------------------------------------------------
# power-law fitting
# ---------------------------------------------------------------------------


def test_fit_recovers_exact_power_law():
    times = np.geomspace(0.05, 80.0, 500)
    values = 3.7 * times ** (-0.25)
    fit = fit_power_law(times, values, (0.5, 50.0))
    assert abs(fit.alpha_hat - 0.25) <= FIT_TOLERANCE
    assert fit.r2 >= 1.0 - 1e-12
    assert 8 <= fit.n_points <= 33
    assert fit.window == (0.5, 50.0)


def test_fit_recovers_growth_exponent_sign():
    # values ~ c * t^{-alpha} with alpha < 0 is growth; the sign convention
    # is that alpha_hat is minus the log-log slope
    times = np.geomspace(0.1, 10.0, 200)
    fit = fit_power_law(times, 2.0 * times**0.5, (0.2, 9.0))
    assert abs(fit.alpha_hat + 0.5) <= FIT_TOLERANCE


def test_fit_tolerates_small_multiplicative_noise():
    rng = np.random.default_rng(7)
    times = np.geomspace(0.1, 60.0, 400)
    noise = rng.uniform(0.98, 1.02, size=times.size)
    values = 5.0 * times ** (-0.25) * noise
    fit = fit_power_law(times, values, (0.5, 50.0))
    assert abs(fit.alpha_hat - 0.25) <= NOISE_TOLERANCE
    assert fit.r2 > 0.98


def test_fit_constant_series_gives_zero_exponent():
    times = np.geomspace(0.1, 10.0, 100)
    fit = fit_power_law(times, np.ones_like(times), (0.2, 9.0))
    assert abs(fit.alpha_hat) <= 1e-12
    assert fit.r2 == 1.0


def test_fit_rejects_bad_windows():
    times = np.geomspace(0.1, 10.0, 100)
    values = times ** (-1.0)
    for window in [(0.0, 1.0), (2.0, 2.0), (5.0, 1.0), (-1.0, 3.0)]:
        with pytest.raises(ValueError):
            fit_power_law(times, values, window)


def test_fit_rejects_window_outside_data():
    times = np.geomspace(0.1, 10.0, 100)
    with pytest.raises(ValueError, match="no usable samples"):
        fit_power_law(times, times ** (-1.0), (100.0, 200.0))


def test_fit_rejects_too_few_points():
    times = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="at least"):
        fit_power_law(times, times ** (-1.0), (0.5, 4.0))


def test_fit_skips_nonpositive_values():
    times = np.geomspace(0.05, 80.0, 500)
    values = 3.7 * times ** (-0.25)
    values[::7] = 0.0  # dropouts must not poison the log
    fit = fit_power_law(times, values, (0.5, 50.0))
    assert abs(fit.alpha_hat - 0.25) <= FIT_TOLERANCE


# ---------------------------------------------------------------------------
# window trimming
# ---------------------------------------------------------------------------


def _synthetic_traj(times, linf, snap_pairs=()):
    times = np.asarray(times, dtype=float)
    ones = np.ones_like(times)
    return Trajectory(
        times=times,
        norm_l1=ones,
        norm_l2=ones,
        norm_linf=np.asarray(linf, dtype=float),
        mass=ones,
        snapshot_times=tuple(t for t, _ in snap_pairs),
        snapshots=tuple(s for _, s in snap_pairs),
    )


def test_window_untouched_without_extinction_or_guard():
    times = np.linspace(0.0, 10.0, 101)
    traj = _synthetic_traj(times, np.exp(-times))
    lo, hi, info = usable_window(traj, Grid(bounds=((-1.0, 1.0),), shape=(11,)), (0.5, 9.0), bc_kind="neumann")
    assert (lo, hi) == (0.5, 9.0)
    assert info["extinction_time"] is None
    assert info["boundary_guard_time"] is None
    assert info["window_warning"] is False


def test_window_caps_at_extinction_and_warns():
    times = np.linspace(0.0, 10.0, 101)
    linf = np.where(times < 3.0, 1.0, 0.0)  # hits the floor at t = 3
    traj = _synthetic_traj(times, linf)
    lo, hi, info = usable_window(traj, Grid(bounds=((-1.0, 1.0),), shape=(11,)), (0.5, 9.5), bc_kind="neumann")
    assert lo == 0.5
    assert hi == pytest.approx(0.999 * 3.0, rel=1e-12)
    assert info["extinction_time"] == pytest.approx(3.0)
    assert info["window_warning"] is True  # usable span < half the request


def test_window_collapse_raises():
    times = np.linspace(0.0, 10.0, 101)
    linf = np.where(times < 0.3, 1.0, 0.0)
    traj = _synthetic_traj(times, linf)
    with pytest.raises(ValueError, match="window collapsed"):
        usable_window(traj, Grid(bounds=((-1.0, 1.0),), shape=(11,)), (0.5, 9.0), bc_kind="neumann")


def test_window_dirichlet_boundary_guard():
    grid = Grid(bounds=((-5.0, 5.0),), shape=(101,))
    space = grid.space()
    wide = GridFunction(space, np.ones(grid.n_total))  # support touches the faces
    narrow_vals = np.zeros(grid.n_total)
    narrow_vals[45:56] = 1.0
    narrow = GridFunction(space, narrow_vals)
    times = np.linspace(0.0, 10.0, 101)
    traj = _synthetic_traj(
        times,
        np.ones_like(times),
        snap_pairs=[(0.0, wide), (1.0, narrow), (2.0, wide), (4.0, wide)],
    )
    lo, hi, info = usable_window(traj, grid, (0.5, 9.0), bc_kind="dirichlet")
    # t = 0 is skipped, t = 1 has a fat margin, t = 2 trips the guard
    assert info["boundary_guard_time"] == 2.0
    assert hi == 2.0
    assert info["window_warning"] is True

    # the same trajectory under Neumann keeps the full window
    lo2, hi2, info2 = usable_window(traj, grid, (0.5, 9.0), bc_kind="neumann")
    assert hi2 == 9.0
    assert info2["boundary_guard_time"] is None


# ---------------------------------------------------------------------------
# configs, hashing, reports
# ---------------------------------------------------------------------------


def test_config_hash_is_order_invariant_and_value_sensitive():
    a = {"grid": {"shape": [9], "bounds": [[0.0, 1.0]]}, "time": {"t_end": 1.0, "n_steps": 4}}
    b = {"time": {"n_steps": 4, "t_end": 1.0}, "grid": {"bounds": [[0.0, 1.0]], "shape": [9]}}
    assert config_hash(a) == config_hash(b)
    c = json.loads(json.dumps(a))
    c["time"]["n_steps"] = 5
    assert config_hash(c) != config_hash(a)


def test_config_hash_handles_infinities_and_numpy_scalars():
    a = {"norm": float("inf"), "w": np.float64(0.5), "n": np.int64(3)}
    b = {"norm": float("inf"), "w": 0.5, "n": 3}
    assert config_hash(a) == config_hash(b)
    assert config_hash({"norm": float("inf")}) != config_hash({"norm": 1e308})


def test_report_to_jsonable_encodes_infinities():
    rep = Report(
        name="demo",
        passed=True,
        metrics={"a": float("inf"), "b": [1.0, float("-inf")], "c": np.float64(2.0)},
        config_hash="h",
    )
    d = rep.to_jsonable()
    assert d["pass"] is True
    assert d["name"] == "demo"
    assert d["metrics"]["a"] == "inf"
    assert d["metrics"]["b"][1] == "-inf"
    assert d["metrics"]["c"] == 2.0
    json.dumps(d)  # must be serializable as-is


def test_spec_from_config_round_trip():
    cfg = {
        "grid": {"bounds": [[0.0, 1.0]], "shape": [16]},
        "operator": {"p": 2.5, "bc": "robin", "robin_b": 0.7, "eps_reg": 1e-6},
        "phi": {"kind": "power", "m": 2.0},
        "perturbation": {"kind": "tanh", "coeff": 0.3},
        "time": {"t_end": 2.0, "n_steps": 10},
    }
    spec = spec_from_config(cfg)
    assert spec.p == 2.5
    assert spec.bc.kind == "robin"
    assert spec.bc.b == 0.7
    assert spec.eps_reg == 1e-6
    assert spec.phi.value(2.0) == pytest.approx(4.0)
    assert spec.perturbation is not None
    tg = time_grid_from_config(cfg)
    assert tg.t_end == 2.0
    assert tg.n_steps == 10
    assert tg.dt == pytest.approx(0.2)


def test_spec_from_config_rejects_unknown_kinds():
    base = {
        "grid": {"bounds": [[0.0, 1.0]], "shape": [8]},
        "operator": {"p": 2.0},
    }
    bad_phi = dict(base, phi={"kind": "log"})
    with pytest.raises(ValueError):
        spec_from_config(bad_phi)
    bad_pert = dict(base, perturbation={"kind": "cubic", "coeff": 1.0})
    with pytest.raises(ValueError):
        spec_from_config(bad_pert)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def test_smooth_bump_has_exact_compact_support():
    grid = Grid(bounds=((-4.0, 4.0),), shape=(801,))
    u = smooth_bump(grid, center=0.0, width=2.0, amplitude=3.0)
    x = grid.nodes()
    outside = np.abs(x) >= 2.0
    assert np.all(u.values[outside] == 0.0)
    assert np.any(u.values > 0.0)
    # node 400 sits exactly at the center, where the profile peaks at amplitude
    assert x[400] == 0.0
    assert u.values[400] == pytest.approx(3.0, rel=1e-12)
    assert float(np.max(u.values)) == u.values[400]


def test_initial_condition_normalizes_mass():
    grid = Grid(bounds=((-4.0, 4.0),), shape=(401,))
    u = initial_condition({"kind": "bump", "width": 1.0, "normalize": "l1"}, grid)
    assert lq_norm(u, 1) == pytest.approx(1.0, abs=1e-12)


def test_initial_condition_barenblatt_matches_profile():
    grid = Grid(bounds=((-4.0, 4.0),), shape=(101,))
    u = initial_condition({"kind": "barenblatt", "p": 3.0, "t0": 1.0}, grid)
    v = barenblatt_on_grid(grid, 3.0, 1.0)
    assert np.array_equal(u.values, v.values)


def test_initial_condition_random_is_seeded():
    grid = Grid(bounds=((-4.0, 4.0),), shape=(101,))
    a = initial_condition({"kind": "random"}, grid, seed=11)
    b = initial_condition({"kind": "random"}, grid, seed=11)
    c = initial_condition({"kind": "random"}, grid, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_initial_condition_rejects_bad_recipes():
    grid = Grid(bounds=((-4.0, 4.0),), shape=(101,))
    with pytest.raises(ValueError):
        initial_condition({"kind": "plane-wave"}, grid)
    with pytest.raises(ValueError):
        initial_condition({"kind": "bump", "amplitude": 0.0, "normalize": "l1"}, grid)


# ---------------------------------------------------------------------------
# exponent queries
# ---------------------------------------------------------------------------


def test_exponents_query_dispatch():
    out = exponents_from_query({"theorem": "plaplace", "d": 1, "p": 3.0, "s": 1.0})
    assert out.alpha_s == pytest.approx(0.25, rel=1e-12)
    lam = exponents_from_query({"theorem": "barenblatt", "d": 2, "p": 3.0})
    assert lam == pytest.approx(0.4, rel=1e-12)
    with pytest.raises(ValueError, match="unknown theorem"):
        exponents_from_query({"theorem": "magic"})


def test_exponents_query_strips_none_values():
    full = {"theorem": "plaplace", "d": 1, "p": 3.0, "s": 1.0, "m0": None, "q0": None}
    lean = {"theorem": "plaplace", "d": 1, "p": 3.0, "s": 1.0}
    assert exponents_from_query(full) == exponents_from_query(lean)


def test_predicted_alpha_sources():
    assert predicted_alpha({"value": 0.3}) == 0.3
    assert predicted_alpha({"theorem": "plaplace", "d": 1, "p": 3.0, "s": 1.0}) == pytest.approx(0.25)
    assert predicted_alpha({"theorem": "barenblatt", "d": 1, "p": 3.0}) == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# experiments and suites
# ---------------------------------------------------------------------------


def _smoke_decay_config():
    return {
        "grid": {"bounds": [[-8.0, 8.0]], "shape": [201]},
        "operator": {"p": 3.0, "bc": "dirichlet", "eps_reg": 1e-8},
        "phi": {"kind": "identity"},
        "perturbation": {"kind": "none"},
        "time": {"t_end": 4.0, "n_steps": 160},
        "experiment": {
            "name": "decay-smoke",
            "initial": {"kind": "bump", "center": 0.0, "width": 0.5, "normalize": "l1"},
            "window": [0.25, 4.0],
            "norm": "inf",
            "predicted": {"theorem": "plaplace", "d": 1, "p": 3.0, "s": 1.0},
            "tolerance": 0.5,
            "r2_min": 0.5,
        },
    }


def test_decay_experiment_smoke():
    cfg = _smoke_decay_config()
    rep = harness.run_decay_experiment(cfg)
    assert rep.passed
    assert rep.name == "decay-smoke"
    assert rep.config_hash == config_hash(cfg)
    m = rep.metrics
    for key in (
        "alpha_hat",
        "alpha_predicted",
        "rel_err",
        "r2",
        "n_points",
        "window_requested",
        "window_used",
        "tolerance",
        "mass_initial",
        "mass_final",
        "extinction_time",
        "boundary_guard_time",
        "window_warning",
    ):
        assert key in m
    assert m["alpha_predicted"] == pytest.approx(0.25)
    assert m["rel_err"] <= 0.5
    # coarse grid, short horizon: still should land in the right ballpark
    assert abs(m["alpha_hat"] - 0.25) <= 0.1

    # the run is deterministic and run_suite dispatches to the same code
    rep2 = harness.run_suite("decay", config=cfg)
    assert rep2.metrics["alpha_hat"] == m["alpha_hat"]
    assert rep2.config_hash == rep.config_hash


def test_barenblatt_comparison_smoke():
    cfg = {
        "grid": {"bounds": [[-6.0, 6.0]], "shape": [301]},
        "operator": {"p": 3.0, "bc": "dirichlet", "eps_reg": 1e-8},
        "phi": {"kind": "identity"},
        "perturbation": {"kind": "none"},
        "time": {"t_end": 1.0, "n_steps": 60},
        "experiment": {
            "name": "barenblatt-smoke",
            "t0": 1.0,
            "t1": 1.3,
            "rel_l1_max": 0.05,
            "refinement_min_ratio": 1.3,
        },
    }
    rep = harness.barenblatt_comparison(cfg, refinement=False)
    assert rep.passed
    assert rep.metrics["rel_l1_error"] <= 0.05
    assert "refinement_ratio" not in rep.metrics


def test_barenblatt_comparison_rejects_small_domain():
    cfg = {
        "grid": {"bounds": [[-6.0, 6.0]], "shape": [301]},
        "operator": {"p": 3.0, "bc": "dirichlet", "eps_reg": 1e-8},
        "phi": {"kind": "identity"},
        "perturbation": {"kind": "none"},
        "time": {"t_end": 1.0, "n_steps": 10},
        "experiment": {
            "name": "barenblatt-too-big",
            "t0": 1.0,
            "t1": 200.0,  # support radius far exceeds the box by then
            "rel_l1_max": 0.05,
            "refinement_min_ratio": 1.3,
        },
    }
    with pytest.raises(ValueError, match="does not fit"):
        harness.barenblatt_comparison(cfg, refinement=False)


def test_contraction_suite_is_thread_invariant():
    kw = dict(
        p_values=(3.0,),
        lambdas=(0.1,),
        q_values=(1.0, float("inf")),
        n_pairs=6,
        n_nodes=16,
        seed=5,
    )
    r1 = harness.contraction_suite(threads=1, **kw)
    r2 = harness.contraction_suite(threads=2, **kw)
    assert r1.passed and r2.passed
    assert r1.metrics["violations"] == r2.metrics["violations"] == 0
    assert r1.metrics["worst_margin"] == r2.metrics["worst_margin"]
    assert r1.config_hash == r2.config_hash


def test_suite_registry():
    assert set(harness.SUITES) == {
        "decay",
        "pme",
        "barenblatt",
        "contraction",
        "order",
        "gn",
        "conservation",
        "convergence",
    }
    with pytest.raises(ValueError, match="unknown suite"):
        harness.run_suite("spectral")


def test_default_configs_hash_stably():
    assert config_hash(harness.default_decay_config()) == config_hash(harness.default_decay_config())
    assert config_hash(harness.default_decay_config()) != config_hash(harness.default_pme_config())
    # the default prediction sources are well-formed queries
    for cfg in (harness.default_decay_config(), harness.default_pme_config()):
        alpha = predicted_alpha(cfg["experiment"]["predicted"])
        assert 0.0 < alpha < 1.0
