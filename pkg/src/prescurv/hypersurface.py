"""Space-like graphs ``x^0 = u(x)`` over the flat torus ``[0, 2 pi)^n``.

Field layout is node-major: a scalar field has the grid shape, a covector
field ``grid_shape + (n,)`` and a 2-tensor ``grid_shape + (n, n)`` so that
numpy's batched linear algebra runs over the nodes directly.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .ambient import WarpedAmbient, ambient_from_spec
from .errors import SpacelikeLost

__all__ = [
    "PeriodicGrid",
    "GraphState",
    "MetricFields",
    "GeometryFields",
    "derivatives",
    "induced_metric",
    "second_fundamental_form",
    "normal",
    "tilde_v",
    "geometry",
    "weingarten_residual",
    "lorentz_norm",
    "save_snapshot",
    "load_snapshot",
    "export_fields_csv",
    "SPACELIKE_FLOOR",
    "CONVEX_FLOOR",
]

SPACELIKE_FLOOR = 1e-6
CONVEX_FLOOR = 1e-10


@dataclass(frozen=True)
class PeriodicGrid:
    n: int
    resolution: tuple

    def __post_init__(self):
        res = tuple(int(r) for r in np.broadcast_to(self.resolution, (self.n,)))
        if any(r < 8 for r in res):
            raise ValueError("each axis needs at least 8 nodes")
        object.__setattr__(self, "resolution", res)

    @property
    def shape(self):
        return self.resolution

    @property
    def spacing(self):
        return tuple(2 * np.pi / r for r in self.resolution)

    def axes(self):
        return [np.arange(r) * (2 * np.pi / r) for r in self.resolution]

    def coords(self):
        """Node coordinates, shape ``(n,) + grid_shape``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"))

    def describe(self):
        return {"n": self.n, "resolution": list(self.resolution)}


@dataclass
class GraphState:
    u: np.ndarray
    grid: PeriodicGrid
    ambient: WarpedAmbient
    t_flow: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != self.grid.shape:
            raise ValueError(f"u has shape {self.u.shape}, grid expects {self.grid.shape}")
        self.ambient.check_time(self.u, "graph value")

    def with_u(self, u, t_flow=None):
        return GraphState(u, self.grid, self.ambient, self.t_flow if t_flow is None else t_flow)


def _shift(a, k, axis):
    return np.roll(a, -k, axis=axis)


def derivatives(u, grid):
    """Second-order central first and second partials with periodic wrap."""
    n = grid.n
    h = grid.spacing
    du = np.empty(u.shape + (n,))
    d2u = np.empty(u.shape + (n, n))
    for a in range(n):
        up, um = _shift(u, 1, a), _shift(u, -1, a)
        du[..., a] = (up - um) / (2 * h[a])
        d2u[..., a, a] = (up - 2 * u + um) / h[a] ** 2
        for b in range(a + 1, n):
            upp = _shift(up, 1, b)
            upm = _shift(up, -1, b)
            ump = _shift(um, 1, b)
            umm = _shift(um, -1, b)
            d2u[..., a, b] = d2u[..., b, a] = (upp - upm - ump + umm) / (4 * h[a] * h[b])
    return du, d2u


@dataclass
class MetricFields:
    g: np.ndarray
    ginv: np.ndarray
    v: np.ndarray
    vtilde: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    du_up: np.ndarray  # sigma^{ij} u_j
    phi: np.ndarray
    dphi: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray


def _ambient_fields(state):
    amb = state.ambient
    u = state.u
    return amb.warp.phi(u), amb.warp.dphi(u), amb.psi(u), amb.psi.derivative(u)


def induced_metric(state, derivs=None):
    """``g_ij = e^{2 psi}(-u_i u_j + sigma_ij)`` with the closed-form inverse and ``v``.

    Raises :class:`SpacelikeLost` at the first node where ``v^2`` drops below
    ``SPACELIKE_FLOOR``.
    """
    n = state.grid.n
    du, d2u = derivatives(state.u, state.grid) if derivs is None else derivs
    phi, dphi, psi, dpsi = _ambient_fields(state)
    phi2 = phi**2
    du_up = du / phi2[..., None]
    v2 = 1.0 - np.sum(du_up * du, axis=-1)
    bad = v2 < SPACELIKE_FLOOR
    if np.any(bad):
        node = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SpacelikeLost(f"graph is no longer space-like at node {node} (v^2={v2[node]:.3e})", node=node)
    v = np.sqrt(v2)
    eye = np.eye(n)
    conf = np.exp(2.0 * psi)[..., None, None]
    g = conf * (phi2[..., None, None] * eye - du[..., :, None] * du[..., None, :])
    ginv = (eye / phi2[..., None, None] + du_up[..., :, None] * du_up[..., None, :] / v2[..., None, None]) / conf
    return MetricFields(g, ginv, v, 1.0 / v, du, d2u, du_up, phi, dphi, psi, dpsi)


def _second_fundamental(state, m):
    """Covariant ``h_ij`` from the time component of the Gauss formula."""
    du, d2u = m.du, m.d2u
    phi, dphi, psi, dpsi = m.phi, m.dphi, m.psi, m.dpsi
    n = state.grid.n
    eye = np.eye(n)
    conf = np.exp(2.0 * psi)[..., None, None, None]
    # dg[..., m, i, j] = d_m g_ij, chain rule through u, du and d2u
    dg = 2.0 * (dpsi[..., None] * du)[..., :, None, None] * m.g[..., None, :, :]
    dg = dg + conf * (
        -d2u[..., :, :, None] * du[..., None, None, :]
        - du[..., None, :, None] * d2u[..., :, None, :]
        + 2.0 * (phi * dphi)[..., None, None, None] * du[..., :, None, None] * eye
    )
    # Christoffel symbols of the first kind Gamma_{lij}, then raise l.
    first = 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
    gamma = np.einsum("...kl,...lij->...kij", m.ginv, first)
    hess_cov = d2u - np.einsum("...kij,...k->...ij", gamma, du)
    gam000 = dpsi
    gam0ij = (dpsi * phi**2 + phi * dphi)[..., None, None] * eye
    # Gamma^0_{0i} vanishes for a time-only conformal factor.
    scale = (np.exp(psi) * m.v)[..., None, None]
    h = scale * (-hess_cov - gam000[..., None, None] * du[..., :, None] * du[..., None, :] - gam0ij)
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def _principal(g, h):
    """Principal curvatures and frames via Cholesky symmetrisation of ``h w = kappa g w``."""
    L = np.linalg.cholesky(g)
    Linv = np.linalg.inv(L)
    A = Linv @ h @ np.swapaxes(Linv, -1, -2)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    kappa, W = np.linalg.eigh(A)
    return kappa, W, Linv


def second_fundamental_form(state, metric=None):
    """Returns ``(h_ij, h^i_j, kappa)`` with kappa sorted ascending per node."""
    m = induced_metric(state) if metric is None else metric
    h = _second_fundamental(state, m)
    mixed = m.ginv @ h
    kappa, _, _ = _principal(m.g, h)
    return h, mixed, kappa


def normal(state, metric=None):
    """Past-directed unit normal ``-v^{-1} e^{-psi}(1, u^i)``, shape ``grid_shape + (n+1,)``."""
    m = induced_metric(state) if metric is None else metric
    lead = -(m.vtilde * np.exp(-m.psi))
    nu = np.empty(state.u.shape + (state.grid.n + 1,))
    nu[..., 0] = lead
    nu[..., 1:] = lead[..., None] * m.du_up
    return nu


def lorentz_norm(state, vec):
    """``<vec, vec>`` in the ambient metric at the graph points."""
    phi, _, psi, _ = _ambient_fields(state)
    conf = np.exp(2.0 * psi)
    return conf * (-vec[..., 0] ** 2 + phi**2 * np.sum(vec[..., 1:] ** 2, axis=-1))


def tilde_v(state, metric=None):
    m = induced_metric(state) if metric is None else metric
    return m.vtilde, float(np.max(m.vtilde))


@dataclass
class GeometryFields:
    g: np.ndarray
    ginv: np.ndarray
    v: np.ndarray
    vtilde: np.ndarray
    nu: np.ndarray
    h: np.ndarray
    h_mixed: np.ndarray
    kappa: np.ndarray
    du: np.ndarray
    F: np.ndarray | None = None
    F_tensor: np.ndarray | None = None
    F_i: np.ndarray | None = None

    @property
    def kappa_min(self):
        return float(np.min(self.kappa))

    @property
    def strictly_convex(self):
        return self.kappa[..., 0] > CONVEX_FLOOR


def geometry(state, func=None):
    """Assemble all per-node fields; F and ``F^{ij}`` are filled where the node is strictly convex."""
    m = induced_metric(state)
    h = _second_fundamental(state, m)
    kappa, W, Linv = _principal(m.g, h)
    geom = GeometryFields(
        m.g, m.ginv, m.v, m.vtilde, normal(state, m), h, m.ginv @ h, kappa, m.du
    )
    if func is not None:
        F = np.full(state.u.shape, np.nan)
        Fi = np.full(kappa.shape, np.nan)
        convex = geom.strictly_convex
        if np.any(convex):
            F[convex] = func.value(kappa[convex])
            Fi[convex] = func.grad(kappa[convex])
        # F^{ij} = L^{-T} W diag(F_i) W^T L^{-1}
        M = np.swapaxes(Linv, -1, -2) @ W
        geom.F = F
        geom.F_i = Fi
        geom.F_tensor = np.einsum("...ik,...k,...jk->...ij", M, Fi, M)
    return geom


def ambient_gamma_field(m, n):
    """Ambient Christoffel symbols ``Gbar^a_{bc}`` at the graph points, shape ``grid + (n+1,)*3``."""
    gam = np.zeros(m.v.shape + (n + 1,) * 3)
    gam[..., 0, 0, 0] = m.dpsi
    diag = m.dpsi * m.phi**2 + m.phi * m.dphi
    rate = m.dpsi + m.dphi / m.phi
    for i in range(n):
        gam[..., 0, 1 + i, 1 + i] = diag
        gam[..., 1 + i, 0, 1 + i] = rate
        gam[..., 1 + i, 1 + i, 0] = rate
    return gam


def weingarten_residual(state):
    """Max deviation of ``nu^a_{,i} + Gbar^a_{bc} nu^b x^c_i`` from ``h_i^k x^a_k``.

    The left side uses central differences of the normal field, so the
    residual is O(h^2).
    """
    m = induced_metric(state)
    h = _second_fundamental(state, m)
    mixed = m.ginv @ h  # mixed[..., k, i] = h^k_i
    nu = normal(state, m)
    grid = state.grid
    n = grid.n
    # tangent vectors x^a_k = (u_k, delta^a_k), shape [..., k, a]
    tangent = np.zeros(state.u.shape + (n, n + 1))
    tangent[..., :, 0] = m.du
    tangent[..., :, 1:] = np.eye(n)
    gam = ambient_gamma_field(m, n)
    lhs = np.empty(state.u.shape + (n, n + 1))
    for i in range(n):
        d_nu = (_shift(nu, 1, i) - _shift(nu, -1, i)) / (2 * grid.spacing[i])
        lhs[..., i, :] = d_nu + np.einsum("...abc,...b,...c->...a", gam, nu, tangent[..., i, :])
    rhs = np.einsum("...ki,...ka->...ia", mixed, tangent)
    return float(np.max(np.abs(lhs - rhs)))


# -- persistence -------------------------------------------------------------


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_snapshot(path, state, geom=None):
    record = {
        "format": "prescurv-snapshot-1",
        "grid": state.grid.describe(),
        "ambient": state.ambient.describe(),
        "t_flow": state.t_flow,
        "u": state.u.tolist(),
    }
    if geom is not None:
        record["kappa"] = geom.kappa.tolist()
        record["vtilde"] = geom.vtilde.tolist()
    _atomic_write(path, json.dumps(record))


def load_snapshot(path):
    with open(path) as fh:
        record = json.load(fh)
    if record.get("format") != "prescurv-snapshot-1":
        raise ValueError(f"{path}: not a prescurv snapshot")
    grid = PeriodicGrid(record["grid"]["n"], tuple(record["grid"]["resolution"]))
    amb = ambient_from_spec(record["ambient"])
    return GraphState(np.asarray(record["u"]), grid, amb, record["t_flow"])


def export_fields_csv(path, state, geom):
    n = state.grid.n
    coords = state.grid.coords().reshape(n, -1)
    header = [f"x{a + 1}" for a in range(n)] + ["u", "vtilde"] + [f"kappa{i + 1}" for i in range(n)]
    cols = [coords[a] for a in range(n)] + [state.u.ravel(), geom.vtilde.ravel()]
    cols += [geom.kappa[..., i].ravel() for i in range(n)]
    if geom.F is not None:
        header.append("F")
        cols.append(geom.F.ravel())
    rows = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])
