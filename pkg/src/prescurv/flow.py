"""Scalar graph flow ``du/dt = -e^{-psi} v (Phi(F) - Phi(f))`` with barriers and monitors.

The flow starts at the upper barrier and is integrated with explicit
steps (forward Euler, or the three-stage strong-stability-preserving
Runge-Kutta scheme, which is a convex combination of Euler steps). Every
accepted step is checked against the invariants the continuum flow is
known to satisfy; a violated guard aborts the run instead of being
clamped.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .ambient import kappa_bar
from .curvfun import level_value
from .errors import ConeViolation, ConvexityLost, FlowAbort, LeftBarriers, PrescurvError
from .hypersurface import (
    CONVEX_FLOOR,
    GraphState,
    _atomic_write,
    ambient_gamma_field,
    derivatives,
    geometry,
    induced_metric,
    normal,
    save_snapshot,
)

log = logging.getLogger(__name__)

__all__ = [
    "Phi",
    "Prescription",
    "trig_field",
    "BarrierPair",
    "FlowConfig",
    "FlowReport",
    "InvalidBarriers",
    "validate_barriers",
    "rhs",
    "step",
    "stable_dt",
    "run",
    "EvolutionCheck",
    "verify_metric_evolution",
    "verify_normal_evolution",
    "convergence_order",
    "ode_oracle",
    "SERIES_COLUMNS",
]

SERIES_COLUMNS = ("step", "t_flow", "dt", "residual", "kappa_min", "vtilde_max", "dist_lower", "dist_upper")
SIGN_TOL = 1e-10
DESCENT_TOL = 1e-12
CONTAINMENT_TOL = 1e-10


class InvalidBarriers(PrescurvError, ValueError):
    """Barrier validation failed before a run."""


@dataclass(frozen=True)
class Phi:
    """Monotone concave reparametrisation: ``log r`` or ``-r^{-m}/m``."""

    kind: str = "log"
    m: float = 1.0

    def __post_init__(self):
        if self.kind not in ("log", "power"):
            raise ValueError(f"unknown Phi kind {self.kind!r}")
        if self.kind == "power" and self.m < 1:
            raise ValueError("power Phi needs m >= 1")

    def __call__(self, r):
        if self.kind == "log":
            return np.log(r)
        return -(r ** -self.m) / self.m

    def deriv(self, r):
        if self.kind == "log":
            return 1.0 / r
        return r ** (-self.m - 1.0)

    def describe(self):
        return {"kind": self.kind, "m": self.m} if self.kind == "power" else {"kind": "log"}


def trig_field(grid, value, modes=()):
    """``value + sum amp * prod_a cos(k_a x^a)`` on the grid nodes."""
    x = grid.coords()
    out = np.full(grid.shape, float(value))
    for mode in modes:
        amp, ks = mode[0], mode[1:]
        if len(ks) != grid.n:
            raise ValueError(f"mode {mode} needs {grid.n} wave numbers")
        term = np.full(grid.shape, float(amp))
        for a, k in enumerate(ks):
            if k:
                term = term * np.cos(k * x[a])
        out = out + term
    return out


@dataclass
class Prescription:
    """Positive prescribed function ``f(t, x)`` and the reparametrisation Phi.

    ``kind`` is ``constant``, ``modes`` (a trigonometric field in ``x``),
    ``nodal`` (explicit node values) or ``callable`` (``func(u, x)``).
    """

    kind: str
    value: float = 1.0
    modes: tuple = ()
    nodal: np.ndarray | None = None
    func: object = None
    phi: Phi = field(default_factory=Phi)

    @classmethod
    def constant(cls, c, phi=None):
        return cls("constant", float(c), phi=phi or Phi())

    @classmethod
    def cosine(cls, c, eps, axes, n, phi=None):
        ks = [1 if a in axes else 0 for a in range(n)]
        return cls("modes", float(c), ((float(eps), *ks),), phi=phi or Phi())

    @classmethod
    def with_modes(cls, c, modes, phi=None):
        return cls("modes", float(c), tuple(tuple(m) for m in modes), phi=phi or Phi())

    @classmethod
    def from_nodes(cls, values, phi=None):
        return cls("nodal", nodal=np.asarray(values, dtype=float), phi=phi or Phi())

    @classmethod
    def from_callable(cls, func, phi=None):
        return cls("callable", func=func, phi=phi or Phi())

    def values(self, state):
        if self.kind == "constant":
            f = np.full(state.u.shape, self.value)
        elif self.kind == "modes":
            f = trig_field(state.grid, self.value, self.modes)
        elif self.kind == "nodal":
            f = self.nodal
        else:
            f = np.asarray(self.func(state.u, state.grid.coords()), dtype=float)
        if not np.all(f > 0):
            raise ValueError("prescribed function must be positive")
        return f

    def tilde(self, state):
        return self.phi(self.values(state))

    @property
    def spatially_constant(self):
        return self.kind == "constant"

    def describe(self):
        out = {"kind": self.kind, "phi": self.phi.describe()}
        if self.kind in ("constant", "modes"):
            out["value"] = self.value
        if self.kind == "modes":
            out["modes"] = [list(m) for m in self.modes]
        if self.kind == "nodal":
            out["nodal"] = self.nodal.tolist()
        return out


@dataclass
class BarrierPair:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("barriers must live on the same grid")
        if np.any(self.lower > self.upper):
            raise ValueError("lower barrier must lie below the upper barrier")


@dataclass
class FlowConfig:
    ambient: object
    grid: object
    func: object
    prescription: Prescription
    barriers: BarrierPair
    safety: float = 0.9
    tolerance: float = 1e-6
    max_steps: int = 200_000
    scheme: str = "euler"
    unsafe_init: bool = False
    initial: np.ndarray | None = None
    monitors: dict = field(
        default_factory=lambda: {"sign": True, "descent": True, "containment": True, "convexity": True, "vtilde": True}
    )
    seed: int = 0
    probes: tuple = ()
    snapshot_every: int = 0
    record_states: int = 0
    resolved: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.safety <= 1:
            raise ValueError("safety factor must lie in (0, 1]")
        if self.scheme not in ("euler", "ssprk3"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def state(self, u, t_flow=0.0):
        return GraphState(u, self.grid, self.ambient, t_flow)

    def probe_nodes(self):
        if self.probes:
            return [tuple(p) for p in self.probes]
        shape = self.grid.shape
        return [tuple(0 for _ in shape), tuple(s // 2 for s in shape), tuple(s // 4 for s in shape)]


# -- barriers ----------------------------------------------------------------


def _barrier_verdict(cfg, u, upper):
    state = cfg.state(u)
    try:
        geom = geometry(state, cfg.func)
    except FlowAbort as exc:
        return {"valid": False, "reason": "not space-like", "witness": list(exc.node)}
    f = cfg.prescription.values(state)
    convex = geom.strictly_convex
    tol = 1e-10 * np.maximum(1.0, np.abs(f))
    out = {"kappa_min": geom.kappa_min, "convex_nodes": int(np.sum(convex)), "nodes": int(convex.size)}
    if upper:
        if not np.all(convex):
            node = tuple(int(i) for i in np.argwhere(~convex)[0])
            out.update(valid=False, reason="not strictly convex", witness=list(node))
            return out
        margin = geom.F - f
        out["min_margin"] = float(np.min(margin))
        bad = margin < -tol
        if np.any(bad):
            node = tuple(int(i) for i in np.argwhere(bad)[0])
            out.update(valid=False, reason="F < f", witness=list(node))
        else:
            out.update(valid=True, reason="strictly convex with F >= f")
        return out
    if not np.any(convex):
        out.update(valid=True, reason="no strictly convex nodes (empty set)", max_margin=None)
        return out
    margin = np.where(convex, geom.F - f, -np.inf)
    out["max_margin"] = float(np.max(margin))
    bad = margin > tol
    if np.any(bad):
        node = tuple(int(i) for i in np.argwhere(bad)[0])
        out.update(valid=False, reason="F > f on a strictly convex node", witness=list(node))
    else:
        out.update(valid=True, reason="F <= f on all strictly convex nodes")
    return out


def validate_barriers(cfg):
    """Per-node verdicts for the lower and upper barrier graphs."""
    return {
        "lower": _barrier_verdict(cfg, cfg.barriers.lower, upper=False),
        "upper": _barrier_verdict(cfg, cfg.barriers.upper, upper=True),
        "ordered": bool(np.all(cfg.barriers.lower <= cfg.barriers.upper)),
    }


# -- right-hand side and stepping ----------------------------------------------


@dataclass
class Evaluation:
    rate: np.ndarray
    residual: np.ndarray  # Phi(F) - Phi(f)
    geom: object
    f: np.ndarray


def rhs(state, cfg):
    """Evaluate ``du/dt``; aborts with :class:`ConvexityLost` off the positive cone."""
    geom = geometry(state, cfg.func)
    convex = geom.strictly_convex
    if not np.all(convex):
        node = tuple(int(i) for i in np.argwhere(~convex)[0])
        raise ConvexityLost(f"strict convexity lost at node {node} (kappa_min={geom.kappa[node][0]:.3e})", node=node)
    f = cfg.prescription.values(state)
    residual = cfg.prescription.phi(geom.F) - cfg.prescription.phi(f)
    psi = state.ambient.psi(state.u)
    rate = -np.exp(-psi) * geom.v * residual
    return Evaluation(rate, residual, geom, f)


def stable_dt(state, ev, cfg):
    """Step from the linearised parabolic scale, capped to keep u above the lower barrier."""
    geom = ev.geom
    n = state.grid.n
    lam_g = np.linalg.eigvalsh(geom.ginv)[..., -1]
    scale = np.exp(-state.ambient.psi(state.u)) * geom.v**2 * cfg.prescription.phi.deriv(geom.F) * np.max(geom.F_i, axis=-1) * lam_g
    hmin2 = min(state.grid.spacing) ** 2
    dt = cfg.safety * hmin2 / (2.0 * n * float(np.max(scale)))
    falling = ev.rate < 0
    if np.any(falling):
        room = (state.u - cfg.barriers.lower + CONTAINMENT_TOL)[falling]
        cap = float(np.min(room / -ev.rate[falling]))
        if 1e-3 * dt < cap < dt:
            dt = cap
    return dt


def step(state, cfg, ev=None, dt=None):
    """Advance one step; returns ``(new_state, dt, evaluation_at_old_state)``."""
    ev = rhs(state, cfg) if ev is None else ev
    dt = stable_dt(state, ev, cfg) if dt is None else dt
    u = state.u
    if cfg.scheme == "euler":
        new = u + dt * ev.rate
    else:
        k0 = ev.rate
        k1 = rhs(state.with_u(u + dt * k0), cfg).rate
        k2 = rhs(state.with_u(u + 0.25 * dt * (k0 + k1)), cfg).rate
        new = u + dt * (k0 + k1 + 4.0 * k2) / 6.0
    return state.with_u(new, state.t_flow + dt), dt, ev


# -- reporting -------------------------------------------------------------------


@dataclass
class FlowReport:
    stop_cause: str
    steps: int
    t_flow: float
    series: dict
    monitors: dict
    partial_integrals: dict
    checks: dict
    final_state: GraphState
    config: dict = field(default_factory=dict)
    seed: int = 0
    message: str = ""
    states: list = field(default_factory=list, repr=False)
    sign_min: list = field(default_factory=list, repr=False)

    @property
    def converged(self):
        return self.stop_cause == "converged"

    def series_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SERIES_COLUMNS)
        for k in range(len(self.series["step"])):
            row = []
            for col in SERIES_COLUMNS:
                val = self.series[col][k]
                row.append(str(int(val)) if col == "step" else repr(float(val)))
            writer.writerow(row)
        return buf.getvalue()

    def to_dict(self):
        return {
            "stop_cause": self.stop_cause,
            "message": self.message,
            "steps": self.steps,
            "t_flow": self.t_flow,
            "seed": self.seed,
            "config": self.config,
            "monitors": self.monitors,
            "checks": self.checks,
            "partial_integrals": self.partial_integrals,
            "final": {
                "residual": self.series["residual"][-1],
                "kappa_min": self.series["kappa_min"][-1],
                "vtilde_max": self.series["vtilde_max"][-1],
                "u_min": float(np.min(self.final_state.u)),
                "u_max": float(np.max(self.final_state.u)),
            },
        }

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        save_snapshot(os.path.join(out_dir, "final_snapshot.json"), self.final_state)
        record = self.to_dict()
        record["final_snapshot"] = "final_snapshot.json"
        _atomic_write(os.path.join(out_dir, "report.json"), json.dumps(record, indent=2, sort_keys=True))
        _atomic_write(os.path.join(out_dir, "series.csv"), self.series_csv())


def _monitor_summary():
    return {"violations": 0, "worst": None}


def _worse(entry, value, lower_is_worse=True):
    if entry["worst"] is None:
        entry["worst"] = value
    else:
        entry["worst"] = min(entry["worst"], value) if lower_is_worse else max(entry["worst"], value)


def run(cfg, snapshot_dir=None, observer=None):
    """Integrate from the upper barrier until the residual drops below the tolerance or a guard fires.

    ``observer(k, state, evaluation)`` is called for every accepted state.
    """
    if not cfg.unsafe_init:
        verdicts = validate_barriers(cfg)
        if not (verdicts["upper"]["valid"] and verdicts["lower"]["valid"]):
            raise InvalidBarriers(f"barrier validation failed: {json.dumps(verdicts)}")
        u0 = cfg.barriers.upper.copy()
    else:
        u0 = cfg.barriers.upper.copy() if cfg.initial is None else np.asarray(cfg.initial, dtype=float)

    mon = cfg.monitors
    strict = not cfg.unsafe_init
    series = {c: [] for c in SERIES_COLUMNS}
    monitors = {k: _monitor_summary() for k in ("sign", "descent", "containment", "convexity", "vtilde")}
    probes = cfg.probe_nodes()
    integrals = {str(p): [0.0] for p in probes}
    states, sign_min = [], []
    lower, upper = cfg.barriers.lower, cfg.barriers.upper

    state = cfg.state(u0)
    stop, message = "max_steps", ""
    dt_used = 0.0
    prev_abs = None
    k = 0
    ev = None
    while True:
        try:
            ev = rhs(state, cfg)
        except FlowAbort as exc:
            stop, message = exc.cause, str(exc)
            break
        resid = float(np.max(np.abs(ev.residual)))
        abs_res = np.abs(ev.residual)
        series["step"].append(k)
        series["t_flow"].append(state.t_flow)
        series["dt"].append(dt_used)
        series["residual"].append(resid)
        series["kappa_min"].append(ev.geom.kappa_min)
        series["vtilde_max"].append(float(np.max(ev.geom.vtilde)))
        series["dist_lower"].append(float(np.min(state.u - lower)))
        series["dist_upper"].append(float(np.min(upper - state.u)))
        smin = float(np.min(ev.residual))
        sign_min.append(smin)
        if k < cfg.record_states:
            states.append(state)
        if observer is not None:
            observer(k, state, ev)
        if prev_abs is not None:
            for p in probes:
                trap = 0.5 * (prev_abs[p] + abs_res[p]) * dt_used
                integrals[str(p)].append(integrals[str(p)][-1] + trap)
        prev_abs = abs_res

        if mon.get("sign", True) and smin < -SIGN_TOL:
            monitors["sign"]["violations"] += 1
        _worse(monitors["sign"], smin)
        _worse(monitors["convexity"], ev.geom.kappa_min)
        if ev.geom.kappa_min <= CONVEX_FLOOR:
            monitors["convexity"]["violations"] += 1
        dl, du_ = series["dist_lower"][-1], series["dist_upper"][-1]
        _worse(monitors["containment"], min(dl, du_))
        if mon.get("containment", True) and min(dl, du_) < -CONTAINMENT_TOL:
            monitors["containment"]["violations"] += 1
            if strict:
                stop, message = "left_barriers", f"u left the barrier region at step {k}"
                break
            log.warning("u left the barrier region at step %d", k)
        if snapshot_dir and cfg.snapshot_every and k % cfg.snapshot_every == 0:
            os.makedirs(snapshot_dir, exist_ok=True)
            save_snapshot(os.path.join(snapshot_dir, f"snapshot_{k:07d}.json"), state, ev.geom)

        if resid < cfg.tolerance:
            stop = "converged"
            break
        if k >= cfg.max_steps:
            stop = "max_steps"
            break
        try:
            new_state, dt_used, _ = step(state, cfg, ev)
        except FlowAbort as exc:
            stop, message = exc.cause, str(exc)
            break
        increase = float(np.max(new_state.u - state.u))
        if mon.get("descent", True) and increase > DESCENT_TOL and strict:
            monitors["descent"]["violations"] += 1
        _worse(monitors["descent"], increase, lower_is_worse=False)
        state = new_state
        k += 1

    vt = series["vtilde_max"]
    early = max(vt[: min(10, len(vt))]) if vt else 1.0
    vt_ok = max(vt) <= 2.0 * early if vt else True
    monitors["vtilde"]["worst"] = max(vt) / early if vt else None
    if not vt_ok and mon.get("vtilde", True):
        monitors["vtilde"]["violations"] += 1

    checks = _final_checks(series, integrals, cfg.tolerance)
    checks["vtilde_bounded"] = bool(vt_ok)
    return FlowReport(
        stop_cause=stop,
        steps=k,
        t_flow=state.t_flow,
        series=series,
        monitors=monitors,
        partial_integrals={p: v[-1] for p, v in integrals.items()},
        checks=checks,
        final_state=state,
        config=cfg.resolved,
        seed=cfg.seed,
        message=message,
        states=states,
        sign_min=sign_min,
    )


def _final_checks(series, integrals, tol):
    res = np.asarray(series["residual"])
    t = np.asarray(series["t_flow"])
    half = len(res) // 2
    tail = res[half:]
    monotone = bool(np.all(np.diff(tail) <= 1e-12 * np.maximum(tail[:-1], 1e-300))) if len(tail) > 1 else True
    out = {"residual_monotone_tail": monotone}
    below = np.nonzero(res < 10 * tol)[0]
    if len(below):
        j = int(below[0])
        span = t[-1] - t[j]
        cauchy = {}
        for p, vals in integrals.items():
            inc = vals[-1] - vals[j]
            cauchy[p] = {"tail_increment": inc, "bound": float(res[j] * span)}
        out["partial_integral_cauchy"] = bool(all(c["tail_increment"] <= c["bound"] * (1 + 1e-9) + 1e-300 for c in cauchy.values()))
        out["partial_integral_tail"] = cauchy
    else:
        out["partial_integral_cauchy"] = None
    return out


# -- evolution identities --------------------------------------------------------


def convergence_order(steps, residuals):
    """Least-squares slope of ``log residual`` against ``log step``."""
    steps = np.asarray(steps, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    return float(np.polyfit(np.log(steps), np.log(residuals), 1)[0])


@dataclass
class EvolutionCheck:
    residual: float
    absolute: float
    scale: float


def _dx(field_, grid, axis):
    """Spectral x-derivative of a periodic field (Nyquist mode dropped).

    The diagnostics differentiate their transport fields spectrally so that
    their own truncation error stays well below that of the solver; fields
    whose time derivative mirrors a solver stencil use that stencil instead.
    """
    N = field_.shape[axis]
    k = np.fft.fftfreq(N, d=1.0 / N)
    k[N // 2] = 0.0 if N % 2 == 0 else k[N // 2]
    shape = [1] * field_.ndim
    shape[axis] = N
    return np.real(np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(field_, axis=axis), axis=axis))


def _check(diff, exact):
    absolute = float(np.max(np.abs(diff)))
    scale = float(np.max(np.abs(exact)))
    return EvolutionCheck(absolute / scale if scale > 0 else absolute, absolute, scale)


def _drift(state, cfg):
    """Evaluation, metric fields and ambient velocity ``(Phi - f~) nu`` of the normal motion."""
    ev = rhs(state, cfg)
    m = induced_metric(state)
    return ev, m, ev.residual[..., None] * normal(state, m)


def _metric_terms(state, cfg):
    ev, m, vel = _drift(state, cfg)
    W = vel[..., 1:]
    grid = state.grid
    n = grid.n
    dg = np.stack([_dx(m.g, grid, c) for c in range(n)], axis=-3)  # [..., c, i, j]
    dW = np.stack([_dx(W, grid, i) for i in range(n)], axis=-2)  # [..., i, c] = d_i W^c
    lie = (
        np.einsum("...c,...cij->...ij", W, dg)
        + np.einsum("...ic,...cj->...ij", dW, m.g)
        + np.einsum("...jc,...ic->...ij", dW, m.g)
    )
    return m.g, lie, 2.0 * ev.residual[..., None, None] * ev.geom.h


def verify_metric_evolution(s0, s1, cfg):
    """Compare the finite-difference total derivative of ``g_ij`` with ``2 (Phi - f~) h_ij``.

    The graph velocity is converted to the velocity of the normally moving
    points by adding the Lie derivative along the tangential drift
    ``x'^i = (Phi - f~) nu^i``. The difference quotient of the two snapshots
    is compared at the midpoint, so the drift term and the right-hand side
    are averaged over both snapshots.
    """
    dt = s1.t_flow - s0.t_flow
    g0, lie0, ex0 = _metric_terms(s0, cfg)
    g1, lie1, ex1 = _metric_terms(s1, cfg)
    total = (g1 - g0) / dt + 0.5 * (lie0 + lie1)
    exact = 0.5 * (ex0 + ex1)
    return _check(total - exact, exact)


def _normal_terms(state, cfg):
    ev, m, vel = _drift(state, cfg)
    grid = state.grid
    n = grid.n
    nu = normal(state, m)
    dnu = np.stack([_dx(nu, grid, c) for c in range(n)], axis=-2)  # [..., c, a]
    gam = ambient_gamma_field(m, n)
    transport = np.einsum("...c,...ca->...a", vel[..., 1:], dnu) + np.einsum("...abc,...b,...c->...a", gam, nu, vel)
    # same stencil as the solver: d/dt of the discrete gradient of u is the discrete gradient of u_t
    grad_res = derivatives(ev.residual, grid)[0]
    tangent = np.zeros(state.u.shape + (n, n + 1))
    tangent[..., :, 0] = m.du
    tangent[..., :, 1:] = np.eye(n)
    exact = np.einsum("...ij,...i,...ja->...a", m.ginv, grad_res, tangent)
    return nu, transport, exact


def verify_normal_evolution(s0, s1, cfg):
    """Compare the covariant total derivative of the normal with ``g^{ij} (Phi - f~)_i x_j``.

    Midpoint comparison as in :func:`verify_metric_evolution`.
    """
    dt = s1.t_flow - s0.t_flow
    nu0, tr0, ex0 = _normal_terms(s0, cfg)
    nu1, tr1, ex1 = _normal_terms(s1, cfg)
    total = (nu1 - nu0) / dt + 0.5 * (tr0 + tr1)
    exact = 0.5 * (ex0 + ex1)
    return _check(total - exact, exact)


# -- ODE oracle ------------------------------------------------------------------


def ode_oracle(cfg, t_end, t_eval=None, rtol=1e-10, atol=1e-13):
    """Integrate the spatially homogeneous reduction of the flow with DOP853.

    Needs a constant prescription and a constant start (the upper barrier,
    or ``cfg.initial`` under ``unsafe_init``); returns the ``solve_ivp``
    result with dense output.
    """
    if not cfg.prescription.spatially_constant:
        raise ValueError("ODE oracle needs a spatially constant prescription")
    u0 = cfg.barriers.upper if cfg.initial is None else np.asarray(cfg.initial)
    if np.ptp(u0) != 0:
        raise ValueError("ODE oracle needs a spatially constant initial graph")
    amb = cfg.ambient
    func = cfg.func
    phi = cfg.prescription.phi
    target = phi(cfg.prescription.value)

    def level_F(u):
        kb = kappa_bar(amb, u)
        if kb <= 0:
            raise ConeViolation(f"level set at t={u} is not strictly convex")
        return float(level_value(func, kb))

    def f(_, y):
        u = y[0]
        return [-np.exp(-amb.psi(u)) * (phi(level_F(u)) - target)]

    return solve_ivp(f, (0.0, t_end), [float(np.ravel(u0)[0])], method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval, dense_output=True)
