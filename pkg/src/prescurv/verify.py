"""Acceptance suite: one function per criterion, each returning a :class:`Criterion`.

Every criterion runs at the pinned tolerances below and records its wall
time against its budget. Nothing here relaxes a threshold to make a check
pass; a red criterion is reported as red.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import ambient as am
from . import curvfun as cf
from .config import scenario_config
from .flow import (
    BarrierPair,
    FlowConfig,
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
from .hypersurface import GraphState, PeriodicGrid, geometry

__all__ = ["Criterion", "CRITERIA", "run_all", "format_table"]


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    budget: float
    runtime: float = 0.0
    checks: dict = field(default_factory=dict)

    @property
    def within_budget(self):
        return self.runtime <= self.budget

    def line(self):
        verdict = "PASS" if self.passed and self.within_budget else "FAIL"
        failed = [k for k, v in self.checks.items() if isinstance(v, dict) and v.get("passed") is False]
        extra = f"  failed: {', '.join(failed)}" if failed else ""
        return f"[{verdict}] {self.number}. {self.title} ({self.runtime:.1f}s / {self.budget:.0f}s){extra}"


def _item(passed, **values):
    return {"passed": bool(passed), **values}


def _timed(number, title, budget):
    def wrap(fn):
        def inner(**kwargs):
            t0 = time.perf_counter()
            checks = fn(**kwargs)
            elapsed = time.perf_counter() - t0
            ok = all(v["passed"] for v in checks.values())
            return Criterion(number, title, ok, budget, elapsed, checks)

        inner.number = number
        inner.title = title
        inner.budget = budget
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner

    return wrap


@_timed(1, "class certification", 30.0)
def criterion_1(samples=10_000, seed=0):
    checks = {}
    for n in (2, 3):
        rep = cf.classify(cf.GaussK(n), samples, seed)
        err = abs(rep.kstar_epsilon0 - 1.0 / n)
        checks[f"GaussK(n={n}) in K*"] = _item(rep.in_Kstar and err <= 1e-6, epsilon0=rep.kstar_epsilon0, error=err)
    for n in (2, 3):
        eps = cf.estimate_epsilon0(cf.InvSigmaK(1, n), samples, seed=seed)
        ratio = eps.boundary_ratio
        checks[f"InvSigmaK(1, n={n}) rejected from K*"] = _item(not eps.in_kstar and ratio < 1e-2, boundary_ratio=ratio)
    for n in (2, 3):
        for k in range(1, n + 1):
            for cls in (cf.SigmaK, cf.InvSigmaK):
                res = cf.check_concavity_c1(cls(k, n), samples, seed)
                checks[f"{cls.__name__}({k}, n={n}) concavity c=1"] = _item(
                    res.passed and res.equality_gap <= 1e-8,
                    worst_margin=res.worst_margin,
                    equality_gap=res.equality_gap,
                )
    return checks


@_timed(2, "closure under power and product", 30.0)
def criterion_2(samples=10_000, seed=0):
    checks = {}
    for n in (2, 3):
        K = cf.GaussK(n)
        for func in (cf.Power(K, 2.0), cf.Product(cf.SigmaK(1, n), K)):
            rep = cf.classify(func, samples, seed)
            checks[f"{func.expr} (n={n}) in K*"] = _item(
                rep.in_Kstar, concavity_margin=rep.concavity_margin, epsilon0=rep.kstar_epsilon0
            )
        rep = cf.classify(cf.Product(cf.InvSigmaK(1, n), K), samples, seed)
        checks[f"invsigma(1)*K (n={n}) in K"] = _item(rep.in_K, concavity_margin=rep.concavity_margin)
    return checks


@_timed(3, "geometry oracle", 10.0)
def criterion_3():
    checks = {}
    mink = am.WarpedAmbient(1, am.Warp.const(1.0), slab=(-1.0, 1.0))
    sizes, errors = [32, 64, 128], []
    for N in sizes:
        grid = PeriodicGrid(1, (N,))
        x = grid.coords()[0]
        u = 0.3 * np.cos(x)
        exact = -(-0.3 * np.cos(x)) / (1.0 - (0.3 * np.sin(x)) ** 2) ** 1.5
        geom = geometry(GraphState(u, grid, mink))
        errors.append(float(np.max(np.abs(geom.kappa[..., 0] - exact))))
    order = -convergence_order(sizes, errors)
    checks["n=1 kappa convergence order"] = _item(order >= 1.9, order=order, errors=errors)
    for warp, level in ((am.Warp.exp_decay(), 0.5), (am.Warp.gauss_decay(), 1.3)):
        amb = am.WarpedAmbient(2, warp, slab=(0.0, 3.0))
        grid = PeriodicGrid(2, (16, 16))
        geom = geometry(GraphState(np.full(grid.shape, level), grid, amb))
        err = float(np.max(np.abs(geom.kappa - am.kappa_bar(amb, level))))
        checks[f"level set {warp.name}"] = _item(err <= 1e-8, error=err)
    return checks


@_timed(4, "ambient identities", 10.0)
def criterion_4():
    checks = {}
    gauss = am.WarpedAmbient(2, am.Warp.gauss_decay(), slab=(0.0, 2.5))
    for t in (0.5, 1.0, 1.5):
        res = am.verify_mean_curvature_identity(gauss, t)
        checks[f"mean curvature identity t={t}"] = _item(res.residual <= 1e-6, residual=res.residual)
        sym = am.riemann_numeric(gauss, t).symmetry_residuals()
        worst = max(sym.values())
        checks[f"Riemann symmetries t={t}"] = _item(worst <= 1e-8, residual=worst)
    flat = am.WarpedAmbient(2, am.Warp.const(1.0), slab=(0.0, 1.0))
    for lam in (0.1, 1.0, 10.0):
        rep = am.convex_chi(flat, lam=lam)
        checks[f"chi flat lambda={lam} not convex"] = _item(not rep.positive_definite, c0=rep.c0)
    decay = am.WarpedAmbient(2, am.Warp.exp_decay(), slab=(0.0, 1.0))
    rep = am.convex_chi(decay, lam=10.0)
    checks["chi exp_decay lambda=10 convex"] = _item(rep.positive_definite, c0=rep.c0)
    return checks


def _monitor_items(report, names=("sign", "descent", "containment", "convexity")):
    return {
        f"monitor {name}": _item(report.monitors[name]["violations"] == 0, worst=report.monitors[name]["worst"])
        for name in names
    }


@_timed(5, "flow convergence, constant data", 120.0)
def criterion_5():
    cfg = scenario_config("flrw-gauss-constant").build()
    trace_t, trace_lo, trace_hi = [], [], []

    def observer(k, state, ev):
        trace_t.append(state.t_flow)
        trace_lo.append(float(np.min(state.u)))
        trace_hi.append(float(np.max(state.u)))

    report = run(cfg, observer=observer)
    sol = ode_oracle(cfg, report.t_flow)
    ref = sol.sol(np.asarray(trace_t))[0]
    dev = float(max(np.max(np.abs(np.asarray(trace_lo) - ref)), np.max(np.abs(np.asarray(trace_hi) - ref))))
    final = float(np.max(np.abs(report.final_state.u - 1.5)))
    checks = {
        "converged": _item(report.converged, stop_cause=report.stop_cause, steps=report.steps),
        "final max|u-1.5|": _item(final <= 1e-6, value=final),
        "PDE vs ODE": _item(dev <= 1e-6, max_deviation=dev),
    }
    checks.update(_monitor_items(report))
    return checks


@_timed(6, "flow convergence, varying prescription", 300.0)
def criterion_6():
    cfg = scenario_config("flrw-gauss-cosine").build()
    report = run(cfg)
    final = report.final_state
    geom = geometry(final, cfg.func)
    post = float(np.max(np.abs(geom.F - cfg.prescription.values(final))))
    resid = report.series["residual"][-1]
    checks = {
        "converged": _item(report.converged, stop_cause=report.stop_cause, steps=report.steps),
        "terminal residual": _item(resid < 1e-5, value=resid),
        "post-hoc max|F-f|": _item(post <= 1e-4, value=post),
        "vtilde bound": _item(report.checks["vtilde_bounded"], ratio=report.monitors["vtilde"]["worst"]),
    }
    checks.update(_monitor_items(report))
    return checks


def _stationary_state():
    """A non-trivial graph with a prescription tabulated from its own curvature."""
    base = scenario_config("flrw-gauss-cosine").build()
    x = base.grid.coords()
    u = 1.2 + 0.03 * np.cos(x[0]) * np.cos(2 * x[1])
    state = GraphState(u, base.grid, base.ambient)
    F = geometry(state, base.func).F
    cfg = FlowConfig(
        base.ambient, base.grid, base.func, Prescription.from_nodes(F),
        BarrierPair(u - 0.5, u), monitors=base.monitors,
    )
    return state, cfg


@_timed(7, "evolution identities", 120.0)
def criterion_7(steps=10, halvings=4):
    cfg = scenario_config("flrw-gauss-cosine", max_steps=steps - 1, scheme="euler").build()
    cfg.record_states = steps
    report = run(cfg)
    orders = {"metric": [], "normal": []}
    for s in report.states:
        ev = rhs(s, cfg)
        dt0 = stable_dt(s, ev, cfg)
        dts = dt0 * 0.5 ** np.arange(halvings)
        res = {"metric": [], "normal": []}
        for dt in dts:
            s1 = step(s, cfg, ev, dt)[0]
            res["metric"].append(verify_metric_evolution(s, s1, cfg).residual)
            res["normal"].append(verify_normal_evolution(s, s1, cfg).residual)
        for key in orders:
            orders[key].append(convergence_order(dts, res[key]))
    state, scfg = _stationary_state()
    s1 = step(state, scfg, dt=1e-3)[0]
    m0 = verify_metric_evolution(state, s1, scfg).absolute
    n0 = verify_normal_evolution(state, s1, scfg).absolute
    return {
        "metric order >= 0.9": _item(min(orders["metric"]) >= 0.9, orders=orders["metric"]),
        "normal order >= 0.9": _item(min(orders["normal"]) >= 0.9, orders=orders["normal"]),
        "stationary metric residual == 0": _item(m0 == 0.0, value=m0),
        "stationary normal residual == 0": _item(n0 == 0.0, value=n0),
    }


def _barrier_cfg(f_value, lower):
    base = scenario_config("flrw-gauss-constant").build()
    return FlowConfig(
        base.ambient, base.grid, base.func, Prescription.constant(f_value),
        BarrierPair(lower, np.full(base.grid.shape, 2.0)),
    )


@_timed(8, "barrier validation", 30.0)
def criterion_8():
    grid = scenario_config("flrw-gauss-constant").build().grid
    x = grid.coords()
    flat = np.full(grid.shape, 1.0)
    v1 = validate_barriers(_barrier_cfg(1.5, flat))
    v2 = validate_barriers(_barrier_cfg(2.5, flat))
    saddle = 0.8 + 0.05 * (np.cos(3 * x[0]) - np.cos(3 * x[1]))
    v3 = validate_barriers(_barrier_cfg(1.95, saddle))
    nonconvex = v3["lower"]["nodes"] - v3["lower"]["convex_nodes"]
    return {
        "valid pair": _item(v1["lower"]["valid"] and v1["upper"]["valid"]),
        "invalid upper (f=2.5)": _item(not v2["upper"]["valid"] and v2["upper"]["reason"] == "F < f"),
        "saddle lower passes vacuously": _item(v3["lower"]["valid"] and nonconvex > 0, nonconvex_nodes=nonconvex),
    }


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def run_all(only=None):
    out = []
    for fn in CRITERIA:
        if only and fn.number not in only:
            continue
        out.append(fn())
    return out


def format_table(results):
    return "\n".join(r.line() for r in results)
