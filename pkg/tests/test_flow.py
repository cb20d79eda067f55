import numpy as np
import pytest

from fracmin.errors import ConfigError, DivergentEnergy, NonConvergence
from fracmin.flow import FlowConfig, Trajectory, _select, certify, minimize
from fracmin.grid import Grid, best_translation
from fracmin.nonlinearity import NonlinearitySpec, zero_nonlinearity

from oracles import bo_soliton

CUBIC = NonlinearitySpec("pure_power", ell=1.0)
SOL_GRID = Grid(1, 80.0, 2048, 0.5)


@pytest.fixture(scope="module")
def soliton_run():
    return minimize(CUBIC, SOL_GRID, FlowConfig(c2=2 * np.pi, el_tol=1e-6))


def test_soliton_flow_converges_to_translate_of_oracle(soliton_run):
    res = soliton_run
    assert res.converged and not res.stalled
    ref = SOL_GRID.sample(bo_soliton)
    _, _, err = best_translation(res.u_star, ref)
    assert err <= 2e-2
    assert res.report.lambda_ == pytest.approx(-1.0, abs=0.05)


def test_flow_invariants(soliton_run):
    res = soliton_run
    assert np.all(np.diff(res.energy_trace) < 0)
    assert res.report.mass == pytest.approx(2 * np.pi, rel=1e-12)
    assert len(res.energy_trace) == res.iterations + 1 == len(res.residual_trace)
    cert = certify(res, CUBIC, 2 * np.pi)
    assert cert.monotone_energy and cert.converged
    assert cert.mass_error < 1e-12
    assert cert.hs_growth >= 1.0
    assert "lambda" in cert.to_dict()


def test_free_energy_minimizer_is_constant():
    g = Grid(1, 20.0, 128, 0.5)
    res = minimize(zero_nonlinearity(), g, FlowConfig(c2=1.0, el_tol=1e-8))
    assert res.converged
    assert abs(res.energy) < 1e-8
    v = res.u_star.values
    assert np.max(v) - np.min(v) < 1e-3 * np.max(np.abs(v))


def test_restarts_are_reproducible_and_parallel_safe():
    g = Grid(1, 40.0, 256, 0.5)
    cfg = FlowConfig(c2=4.0, restarts=3, seed=11, el_tol=1e-7)
    a = minimize(CUBIC, g, cfg)
    b = minimize(CUBIC, g, cfg)
    c = minimize(CUBIC, g, FlowConfig(c2=4.0, restarts=3, seed=11, el_tol=1e-7, workers=3))
    np.testing.assert_array_equal(a.u_star.values, b.u_star.values)
    np.testing.assert_array_equal(a.u_star.values, c.u_star.values)
    assert a.restart_energies == c.restart_energies
    assert len(a.restart_energies) == 3
    # energies within the tie tolerance are decided by the residual
    assert a.energy <= min(a.restart_energies) + 1e-12 * abs(a.energy)
    assert a.restart_residuals[a.best_restart] == min(
        r for e, r in zip(a.restart_energies, a.restart_residuals)
        if e <= min(a.restart_energies) + 1e-12 * abs(a.energy))
    assert a.spread >= 0


def test_different_seeds_give_different_restart_paths():
    g = Grid(1, 40.0, 256, 0.5)
    a = minimize(CUBIC, g, FlowConfig(c2=4.0, restarts=2, seed=1, max_iters=5))
    b = minimize(CUBIC, g, FlowConfig(c2=4.0, restarts=2, seed=2, max_iters=5))
    assert a.restart_energies[1] != b.restart_energies[1]


def _traj(energy, residual, k):
    e = np.array([0.0, energy])
    return Trajectory(np.zeros(4), e, e, e, 1, True, False, 0.0, residual, k)


def test_selection_prefers_low_energy_then_low_residual():
    assert _select([_traj(-1.0, 1e-3, 0), _traj(-2.0, 1.0, 1)]).restart == 1
    tie = [_traj(-1.0, 1e-3, 0), _traj(-1.0 - 1e-14, 1e-6, 1), _traj(-1.0, 1e-6, 2)]
    assert _select(tie).restart == 1


def test_nonconvergence_is_flagged_or_raised():
    g = Grid(1, 40.0, 256, 0.5)
    res = minimize(CUBIC, g, FlowConfig(c2=4.0, max_iters=3))
    assert not res.converged and res.iterations == 3
    with pytest.raises(NonConvergence) as exc:
        minimize(CUBIC, g, FlowConfig(c2=4.0, max_iters=3, raise_on_nonconvergence=True))
    assert exc.value.result is not None


def test_energy_floor_stops_the_flow():
    with pytest.raises(DivergentEnergy):
        minimize(CUBIC, SOL_GRID, FlowConfig(c2=2 * np.pi, energy_floor=-1.0))


@pytest.mark.parametrize("kwargs,rule", [
    (dict(c2=0.0), "c2 > 0"),
    (dict(c2=1.0, backtrack_factor=1.5), "backtrack_factor in (0,1)"),
    (dict(c2=1.0, restarts=0), "restarts >= 1"),
    (dict(c2=1.0, init_strategy="magic"), "init_strategy known"),
    (dict(c2=1.0, init_strategy="warm_start"), "warm_start given"),
])
def test_flow_config_validation(kwargs, rule):
    with pytest.raises(ConfigError) as exc:
        FlowConfig(**kwargs)
    assert exc.value.rule == rule


def test_warm_start_resumes_and_checks_grid(soliton_run):
    cfg = FlowConfig(c2=2 * np.pi, init_strategy="warm_start", warm_start=soliton_run.u_star)
    res = minimize(CUBIC, SOL_GRID, cfg)
    assert res.iterations == 0 and res.converged
    with pytest.raises(ConfigError):
        minimize(CUBIC, Grid(1, 80.0, 1024, 0.5), cfg)


def test_random_bump_start_reaches_same_energy(soliton_run):
    res = minimize(CUBIC, SOL_GRID, FlowConfig(c2=2 * np.pi, init_strategy="random_bump",
                                               seed=3, el_tol=1e-6))
    assert res.converged
    assert res.energy == pytest.approx(soliton_run.energy, abs=1e-8)


def test_snapshots_are_recorded():
    g = Grid(1, 40.0, 256, 0.5)
    res = minimize(CUBIC, g, FlowConfig(c2=4.0, max_iters=20, snapshot_every=5))
    assert len(res.snapshots) == 5
    assert all(s.mass == pytest.approx(4.0, rel=1e-12) for s in res.snapshots)
