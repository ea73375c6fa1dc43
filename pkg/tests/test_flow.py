import numpy as np
import pytest
from scipy.integrate import quad

from prescurv import ambient as am
from prescurv.curvfun import GaussK, InvSigmaK
from prescurv.errors import ConvexityLost
from prescurv.flow import (
    BarrierPair,
    FlowConfig,
    InvalidBarriers,
    Phi,
    Prescription,
    convergence_order,
    ode_oracle,
    rhs,
    run,
    stable_dt,
    step,
    validate_barriers,
    verify_metric_evolution,
    verify_normal_evolution,
)
from prescurv.hypersurface import GraphState, PeriodicGrid, geometry


def make_cfg(grid, amb, f=1.5, lower=1.0, upper=2.0, **kw):
    presc = f if isinstance(f, Prescription) else Prescription.constant(f)
    lo = np.full(grid.shape, lower) if np.isscalar(lower) else lower
    up = np.full(grid.shape, upper) if np.isscalar(upper) else upper
    return FlowConfig(amb, grid, GaussK(grid.n), presc, BarrierPair(lo, up), **kw)


def cosine(grid, eps=0.1):
    return Prescription.with_modes(1.5, [(eps,) + (1,) * grid.n])


def test_phi_variants():
    r = np.array([0.5, 1.0, 2.0])
    log, power = Phi(), Phi("power", 2.0)
    np.testing.assert_allclose(log(r), np.log(r))
    np.testing.assert_allclose(power(r), -(r**-2.0) / 2.0)
    for phi in (log, power):
        assert np.all(phi.deriv(r) > 0)
        assert np.all(np.diff(phi.deriv(r)) < 0)
    with pytest.raises(ValueError):
        Phi("power", 0.5)
    with pytest.raises(ValueError):
        Phi("exp")


def test_prescription_must_be_positive(gauss2, grid16):
    state = GraphState(np.full(grid16.shape, 1.0), grid16, gauss2)
    with pytest.raises(ValueError):
        Prescription.with_modes(0.05, [(0.1, 1, 1)]).values(state)
    vals = Prescription.cosine(1.5, 0.2, axes=[0], n=2).values(state)
    np.testing.assert_allclose(vals, 1.5 + 0.2 * np.cos(grid16.coords()[0]))


def test_config_invariants(gauss2, grid16):
    with pytest.raises(ValueError):
        make_cfg(grid16, gauss2, tolerance=0.0)
    with pytest.raises(ValueError):
        make_cfg(grid16, gauss2, safety=1.5)
    with pytest.raises(ValueError):
        make_cfg(grid16, gauss2, lower=2.0, upper=1.0)


@pytest.mark.parametrize("b, c", [(2.0, 1.5), (1.2, 1.5), (0.8, 0.8)])
def test_rhs_on_level_sets(gauss2, grid16, b, c):
    cfg = make_cfg(grid16, gauss2, f=c, lower=0.6, upper=2.2)
    ev = rhs(GraphState(np.full(grid16.shape, b), grid16, gauss2), cfg)
    np.testing.assert_allclose(ev.rate, -(np.log(b) - np.log(c)), atol=1e-12)


def test_rhs_non_positive_from_upper_barrier(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2, f=cosine(grid16))
    ev = rhs(GraphState(cfg.barriers.upper, grid16, gauss2), cfg)
    assert np.all(ev.rate <= 0)


def test_rhs_aborts_off_the_cone(gauss2, grid16):
    x = grid16.coords()
    cfg = make_cfg(grid16, gauss2, lower=0.5)
    saddle = GraphState(1.0 + 0.1 * (np.cos(3 * x[0]) - np.cos(3 * x[1])), grid16, gauss2)
    with pytest.raises(ConvexityLost) as info:
        rhs(saddle, cfg)
    assert info.value.cause == "convexity_lost" and len(info.value.node) == 2


def _stationary(gauss2, grid16):
    x = grid16.coords()
    u = 1.2 + 0.03 * np.cos(x[0]) * np.cos(2 * x[1])
    state = GraphState(u, grid16, gauss2)
    F = geometry(state, GaussK(2)).F
    return state, make_cfg(grid16, gauss2, f=Prescription.from_nodes(F), lower=u - 0.5, upper=u)


@pytest.mark.parametrize("scheme", ["euler", "ssprk3"])
def test_stationary_state_is_fixed_exactly(gauss2, grid16, scheme):
    state, cfg = _stationary(gauss2, grid16)
    cfg.scheme = scheme
    new, dt, ev = step(state, cfg)
    assert np.all(ev.rate == 0)
    np.testing.assert_array_equal(new.u, state.u)
    assert new.t_flow == dt > 0


def test_zero_step_convergence(gauss2, grid16):
    state, cfg = _stationary(gauss2, grid16)
    rep = run(cfg)
    assert rep.converged and rep.steps == 0


def test_constant_data_euler_step_matches_scalar_ode(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2)
    state = GraphState(np.full(grid16.shape, 2.0), grid16, gauss2)
    new, dt, _ = step(state, cfg)
    expected = 2.0 + dt * -(np.log(2.0) - np.log(1.5))
    assert np.max(np.abs(new.u - expected)) <= 1e-14


def test_dt_is_capped_by_lower_barrier(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2, lower=1.999, upper=2.0, f=1.0)
    state = GraphState(np.full(grid16.shape, 2.0), grid16, gauss2)
    ev = rhs(state, cfg)
    dt = stable_dt(state, ev, cfg)
    cfg_free = make_cfg(grid16, gauss2, lower=0.6, upper=2.0, f=1.0)
    assert dt < stable_dt(state, ev, cfg_free)
    assert np.all(step(state, cfg, ev, dt)[0].u >= 1.999 - 1e-10)


def test_validate_barrier_examples(gauss2):
    grid16 = PeriodicGrid(2, (32, 32))
    ok = validate_barriers(make_cfg(grid16, gauss2))
    assert ok["lower"]["valid"] and ok["upper"]["valid"] and ok["ordered"]
    bad = validate_barriers(make_cfg(grid16, gauss2, f=2.5))
    assert not bad["upper"]["valid"] and bad["upper"]["reason"] == "F < f"
    assert bad["upper"]["witness"] == [0, 0]
    assert ok["lower"]["max_margin"] == pytest.approx(-0.5) and ok["upper"]["min_margin"] == pytest.approx(0.5)
    x = grid16.coords()
    saddle = 0.8 + 0.05 * (np.cos(3 * x[0]) - np.cos(3 * x[1]))
    vac = validate_barriers(make_cfg(grid16, gauss2, f=1.95, lower=saddle))
    assert vac["lower"]["valid"] and vac["lower"]["convex_nodes"] < vac["lower"]["nodes"]


def test_empty_convex_set_is_vacuous():
    amb = am.WarpedAmbient(2, am.Warp.const(1.0), slab=(-1.0, 3.0))
    grid = PeriodicGrid(2, (16, 16))
    cfg = FlowConfig(amb, grid, GaussK(2), Prescription.constant(1.0), BarrierPair(np.zeros(grid.shape), np.full(grid.shape, 2.0)))
    v = validate_barriers(cfg)
    assert v["lower"]["valid"] and v["lower"]["convex_nodes"] == 0
    assert not v["upper"]["valid"]


def test_non_spacelike_barrier_is_invalid_with_witness():
    amb = am.WarpedAmbient(2, am.Warp.const(1.0), slab=(-3.0, 3.0))
    grid = PeriodicGrid(2, (16, 16))
    steep = 1.5 * np.sin(grid.coords()[0])
    cfg = FlowConfig(amb, grid, GaussK(2), Prescription.constant(1.0), BarrierPair(steep - 0.5, np.full(grid.shape, 2.5)))
    v = validate_barriers(cfg)
    assert not v["lower"]["valid"] and v["lower"]["reason"] == "not space-like"
    assert len(v["lower"]["witness"]) == 2


def test_run_refuses_invalid_barriers(gauss2, grid16):
    with pytest.raises(InvalidBarriers):
        run(make_cfg(grid16, gauss2, f=2.5))


@pytest.fixture(scope="module")
def cosine_run():
    amb = am.WarpedAmbient(2, am.Warp.gauss_decay(), slab=(0.5, 2.5))
    grid = PeriodicGrid(2, (16, 16))
    cfg = make_cfg(grid, amb, f=cosine(grid), tolerance=1e-5, scheme="ssprk3", record_states=3)
    return cfg, run(cfg)


def test_cosine_run_converges_with_clean_monitors(cosine_run):
    cfg, rep = cosine_run
    assert rep.converged
    assert rep.series["residual"][-1] < 1e-5
    for name in ("sign", "descent", "containment", "convexity", "vtilde"):
        assert rep.monitors[name]["violations"] == 0, name
    assert rep.checks["residual_monotone_tail"] and rep.checks["vtilde_bounded"]
    assert rep.checks["partial_integral_cauchy"]
    t = np.asarray(rep.series["t_flow"])
    assert np.all(np.diff(t) > 0)
    geom = geometry(rep.final_state, cfg.func)
    assert np.max(np.abs(geom.F - cfg.prescription.values(rep.final_state))) <= 1e-4


def test_series_is_reproducible(cosine_run):
    cfg, rep = cosine_run
    again = run(cfg)
    assert again.series_csv() == rep.series_csv()
    header = rep.series_csv().splitlines()[0]
    assert header == "step,t_flow,dt,residual,kappa_min,vtilde_max,dist_lower,dist_upper"


def test_report_write(tmp_path, cosine_run):
    cfg, rep = cosine_run
    rep.write(tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["final_snapshot.json", "report.json", "series.csv"]


def test_max_steps_stop(gauss2, grid16):
    rep = run(make_cfg(grid16, gauss2, max_steps=5))
    assert rep.stop_cause == "max_steps" and rep.steps == 5
    assert len(rep.series["step"]) == 6


def test_power_phi_converges(gauss2, grid16):
    presc = Prescription.constant(1.5, Phi("power", 2.0))
    rep = run(make_cfg(grid16, gauss2, f=presc, tolerance=1e-6, scheme="ssprk3"))
    assert rep.converged
    assert np.max(np.abs(rep.final_state.u - 1.5)) < 1e-5


def test_other_curvature_function_converges(gauss2, grid16):
    # InvSigmaK(1) on a level set t equals t / n times n = t / n * ... scaled by F(1,1) = 1/2
    cfg = make_cfg(grid16, gauss2, f=0.75)
    cfg.func = InvSigmaK(1, 2)
    cfg.tolerance = 1e-6
    rep = run(cfg)
    assert rep.converged
    assert np.max(np.abs(rep.final_state.u - 1.5)) < 1e-5


def test_unsafe_init_demotes_containment(gauss2, grid16, caplog):
    cfg = make_cfg(grid16, gauss2, upper=1.8, unsafe_init=True, initial=np.full(grid16.shape, 2.0), max_steps=20)
    rep = run(cfg)
    assert rep.stop_cause == "max_steps"
    assert rep.monitors["containment"]["violations"] > 0


def test_strict_run_stops_when_leaving_barriers(gauss2, grid16):
    # a lower barrier above the stationary level is crossed by the flow
    cfg = make_cfg(grid16, gauss2, f=1.5, lower=1.0, upper=2.0)
    cfg.barriers = BarrierPair(np.full(grid16.shape, 1.0), np.full(grid16.shape, 2.0))
    cfg.barriers.lower = np.full(grid16.shape, 1.7)  # bypasses validation on purpose
    cfg.unsafe_init = False
    rep = run_without_validation(cfg)
    assert rep.stop_cause == "left_barriers"


def run_without_validation(cfg):
    import prescurv.flow as flow

    original = flow.validate_barriers
    flow.validate_barriers = lambda c: {"lower": {"valid": True}, "upper": {"valid": True}}
    try:
        return run(cfg)
    finally:
        flow.validate_barriers = original


def test_ode_oracle(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2)
    sol = ode_oracle(cfg, 40.0)
    assert sol.success
    assert np.all(np.diff(sol.y[0]) <= 0)
    assert sol.y[0, -1] == pytest.approx(1.5, abs=1e-8)
    # with f = F(u0) the trajectory is constant
    flat = ode_oracle(make_cfg(grid16, gauss2, f=2.0), 5.0)
    np.testing.assert_allclose(flat.y[0], 2.0, atol=1e-14)
    with pytest.raises(ValueError):
        ode_oracle(make_cfg(grid16, gauss2, f=cosine(grid16)), 1.0)


def test_ode_oracle_matches_quadrature(gauss2, grid16):
    # F = u on level sets, so y' = -log(y / c) and t(y) = int_y^{y0} ds / log(s / c)
    sol = ode_oracle(make_cfg(grid16, gauss2), 3.0, t_eval=[0.5, 1.0, 3.0])
    for t, y in zip(sol.t, sol.y[0]):
        elapsed, _ = quad(lambda s: 1.0 / np.log(s / 1.5), y, 2.0, epsabs=1e-13, epsrel=1e-12)
        assert elapsed == pytest.approx(t, rel=1e-8)


def test_pde_tracks_ode_on_small_grid(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2, scheme="ssprk3", tolerance=1e-7)
    trace = []
    rep = run(cfg, observer=lambda k, s, ev: trace.append((s.t_flow, s.u.min(), s.u.max())))
    trace = np.asarray(trace)
    ref = ode_oracle(cfg, rep.t_flow).sol(trace[:, 0])[0]
    assert np.max(np.abs(trace[:, 1:] - ref[:, None])) <= 1e-6


def test_metric_evolution_on_constant_data(gauss2, grid16):
    # snapshots taken on the exact homogeneous trajectory g(t) = phi(u(t))^2 delta
    cfg = make_cfg(grid16, gauss2)
    s0 = GraphState(np.full(grid16.shape, 2.0), grid16, gauss2)
    dt = 1e-5
    s1 = s0.with_u(np.full(grid16.shape, ode_oracle(cfg, dt).sol(dt)[0]), dt)
    assert verify_metric_evolution(s0, s1, cfg).residual <= 1e-6
    assert verify_normal_evolution(s0, s1, cfg).residual <= 1e-10
    # an explicit Euler snapshot keeps the first-order stepping error only
    euler = step(s0, cfg, dt=dt)[0]
    assert verify_metric_evolution(s0, euler, cfg).residual <= 1e-5


def test_stationary_identities_are_exactly_zero(gauss2, grid16):
    state, cfg = _stationary(gauss2, grid16)
    s1 = step(state, cfg, dt=1e-3)[0]
    assert verify_metric_evolution(state, s1, cfg).absolute == 0.0
    assert verify_normal_evolution(state, s1, cfg).absolute == 0.0


def test_evolution_identities_first_order_on_first_step(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2, f=Prescription.cosine(1.5, 0.1, axes=[0], n=2))
    s0 = GraphState(cfg.barriers.upper, grid16, gauss2)
    ev = rhs(s0, cfg)
    dts = stable_dt(s0, ev, cfg) * 0.5 ** np.arange(4)
    for check in (verify_metric_evolution, verify_normal_evolution):
        res = [check(s0, step(s0, cfg, ev, dt)[0], cfg).residual for dt in dts]
        assert convergence_order(dts, res) >= 0.9


def test_normal_identity_vanishes_without_forcing(gauss2, grid16):
    cfg = make_cfg(grid16, gauss2, f=Prescription.cosine(1.5, 0.0, axes=[0], n=2))
    s0 = GraphState(cfg.barriers.upper, grid16, gauss2)
    s1 = step(s0, cfg, dt=1e-4)[0]
    assert verify_normal_evolution(s0, s1, cfg).residual <= 1e-10
