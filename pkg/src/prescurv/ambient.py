"""Warped Lorentzian product ambients ``e^{2 psi}(-dt^2 + phi(t)^2 dx^2)`` over a flat torus.

All quantities are analytic in ``t`` except the curvature tensor, which is
assembled from central differences of the analytic Christoffel symbols.
Indices run over ``(t, x^1, ..., x^n)``; ``gamma[a, b, c]`` is the symbol
with upper index ``a`` and lower indices ``b, c``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline
from scipy.stats import qmc

from .errors import DomainError, UnsupportedConfiguration

__all__ = [
    "Warp",
    "ConformalFactor",
    "WarpedAmbient",
    "AmbientChristoffels",
    "AmbientCurvature",
    "MeanCurvatureCheck",
    "TimelikeVerdict",
    "ChiReport",
    "level_second_fundamental",
    "christoffels",
    "christoffels_fd",
    "riemann_numeric",
    "verify_mean_curvature_identity",
    "timelike_convergence_sample",
    "convex_chi",
    "reference_metric",
]


@dataclass(frozen=True)
class Warp:
    """Scale function phi(t) of the spatial metric together with its first two derivatives."""

    name: str
    phi: Callable
    dphi: Callable
    ddphi: Callable
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.phi(t)

    @classmethod
    def exp_decay(cls):
        return cls("exp_decay", lambda t: np.exp(-t), lambda t: -np.exp(-t), lambda t: np.exp(-t))

    @classmethod
    def gauss_decay(cls):
        def phi(t):
            return np.exp(-0.5 * np.square(t))

        return cls(
            "gauss_decay",
            phi,
            lambda t: -t * phi(t),
            lambda t: (np.square(t) - 1.0) * phi(t),
        )

    @classmethod
    def const(cls, value=1.0):
        value = float(value)
        if value <= 0:
            raise ValueError("constant warp must be positive")
        return cls(
            "const",
            lambda t: np.full_like(np.asarray(t, dtype=float), value),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            {"value": value},
        )

    @classmethod
    def cosh(cls):
        return cls("cosh", np.cosh, np.sinh, np.cosh)

    @classmethod
    def spline(cls, knots, values):
        """Cubic spline through ``(knots, values)``; derivatives are those of the spline."""
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 4:
            raise ValueError("spline warp needs at least 4 matching knots and values")
        if np.any(values <= 0):
            raise ValueError("spline warp values must be positive")
        cs = CubicSpline(knots, values)
        d1, d2 = cs.derivative(1), cs.derivative(2)
        return cls(
            "spline",
            cs,
            d1,
            d2,
            {"knots": knots.tolist(), "values": values.tolist()},
        )

    @classmethod
    def from_name(cls, name, **params):
        builders = {
            "exp_decay": cls.exp_decay,
            "gauss_decay": cls.gauss_decay,
            "const": cls.const,
            "cosh": cls.cosh,
        }
        if name not in builders:
            raise ValueError(f"unknown warp {name!r}; expected one of {sorted(builders)}")
        return builders[name](**params)

    def describe(self):
        return {"name": self.name, **self.params}


@dataclass(frozen=True)
class ConformalFactor:
    """Time-only conformal factor psi(t) = a + b t."""

    a: float = 0.0
    b: float = 0.0

    def __call__(self, t):
        return self.a + self.b * np.asarray(t, dtype=float)

    def derivative(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.b)

    @property
    def is_zero(self):
        return self.a == 0.0 and self.b == 0.0

    def describe(self):
        return [self.a, self.b]


@dataclass(frozen=True)
class WarpedAmbient:
    n: int
    warp: Warp
    psi: ConformalFactor = ConformalFactor()
    slab: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"spatial dimension must be 1, 2 or 3, got {self.n}")
        t0, t1 = self.slab
        if not t0 < t1:
            raise ValueError("slab must satisfy t_min < t_max")
        probe = np.linspace(t0, t1, 257)
        if np.any(self.warp.phi(probe) <= 0):
            raise ValueError("warp must be positive on the slab")

    @property
    def width(self):
        return self.slab[1] - self.slab[0]

    def check_time(self, t, what="time"):
        t = np.asarray(t, dtype=float)
        lo, hi = self.slab
        if not np.all(np.isfinite(t)) or np.any(t < lo) or np.any(t > hi):
            bad = t[(t < lo) | (t > hi) | ~np.isfinite(t)] if t.ndim else t
            raise DomainError(f"{what} {np.ravel(bad)[0]!r} outside slab [{lo}, {hi}]")
        return t

    def metric(self, t):
        """Lorentzian metric matrix at time ``t`` (any ``x``)."""
        self.check_time(t)
        conf = np.exp(2.0 * self.psi(t))
        g = np.zeros((self.n + 1, self.n + 1))
        g[0, 0] = -conf
        g[1:, 1:] = conf * self.warp.phi(t) ** 2 * np.eye(self.n)
        return g

    def describe(self):
        return {
            "dimension": self.n,
            "warp": self.warp.describe(),
            "psi": self.psi.describe(),
            "slab": list(self.slab),
        }


@dataclass(frozen=True)
class AmbientChristoffels:
    t: float
    gamma: np.ndarray

    @property
    def g0_00(self):
        return self.gamma[0, 0, 0]

    @property
    def g0_0i(self):
        return self.gamma[0, 0, 1:]

    @property
    def g0_ij(self):
        return self.gamma[0, 1:, 1:]

    @property
    def gi_0j(self):
        return self.gamma[1:, 0, 1:]

    @property
    def gi_jk(self):
        return self.gamma[1:, 1:, 1:]


def level_second_fundamental(amb, t):
    """Second fundamental form of the slice ``{x^0 = t}`` w.r.t. the past normal.

    Returns ``(hbar, kappa_bar)`` where ``hbar`` is the covariant n x n
    matrix and ``kappa_bar`` the common principal curvature.
    """
    t = float(amb.check_time(t))
    phi, dphi = amb.warp.phi(t), amb.warp.dphi(t)
    psi, dpsi = amb.psi(t), amb.psi.derivative(t)
    hbar = -np.exp(psi) * (phi * dphi + dpsi * phi**2) * np.eye(amb.n)
    kappa_bar = float(-np.exp(-psi) * (dphi / phi + dpsi))
    return hbar, kappa_bar


def kappa_bar(amb, t):
    """Vectorised level-set principal curvature ``-e^{-psi}(phi'/phi + psi')``."""
    t = amb.check_time(t)
    return -np.exp(-amb.psi(t)) * (amb.warp.dphi(t) / amb.warp.phi(t) + amb.psi.derivative(t))


def christoffels(amb, t):
    t = float(amb.check_time(t))
    n = amb.n
    phi, dphi = amb.warp.phi(t), amb.warp.dphi(t)
    dpsi = float(amb.psi.derivative(t))
    gamma = np.zeros((n + 1, n + 1, n + 1))
    gamma[0, 0, 0] = dpsi
    eye = np.eye(n)
    gamma[0, 1:, 1:] = (dpsi * phi**2 + phi * dphi) * eye
    for i in range(n):
        gamma[1 + i, 0, 1 + i] = gamma[1 + i, 1 + i, 0] = dpsi + dphi / phi
    return AmbientChristoffels(t, gamma)


def _default_step(amb):
    return amb.width * 1e-4


def christoffels_fd(amb, t, step=None):
    """Christoffel symbols from central differences of sampled metric values."""
    h = _default_step(amb) if step is None else step
    amb.check_time([t - h, t + h], "stencil point")
    g = amb.metric(t)
    dg = np.zeros((amb.n + 1,) * 3)
    dg[0] = (amb.metric(t + h) - amb.metric(t - h)) / (2 * h)
    ginv = np.linalg.inv(g)
    # dg[c, a, b] = d_c g_ab
    lowered = 0.5 * (np.einsum("bmc->mbc", dg) + np.einsum("cmb->mbc", dg) - dg)
    return AmbientChristoffels(t, np.einsum("am,mbc->abc", ginv, lowered))


@dataclass(frozen=True)
class AmbientCurvature:
    t: float
    riemann: np.ndarray  # all indices down
    ricci: np.ndarray
    step: float

    def symmetry_residuals(self):
        r = self.riemann
        return {
            "antisym_first": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))),
            "antisym_last": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))),
            "pair": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))),
            "bianchi": float(
                np.max(np.abs(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2)))
            ),
        }


def riemann_numeric(amb, t, step=None):
    """Curvature tensor from Richardson-extrapolated central differences of the Christoffels.

    The convention is ``R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}``,
    ``Ric_{bd} = R^a_{bad}``; with it the slice identity for the mean
    curvature holds as stated in :func:`verify_mean_curvature_identity`.
    """
    h = _default_step(amb) if step is None else step
    amb.check_time([t - h, t + h], "stencil point")
    gam = christoffels(amb, t).gamma

    def central(hh):
        return (christoffels(amb, t + hh).gamma - christoffels(amb, t - hh).gamma) / (2 * hh)

    dgam = np.zeros((amb.n + 1,) + gam.shape)  # dgam[c, a, b, d] = d_c G^a_{bd}
    dgam[0] = (4.0 * central(h / 2) - central(h)) / 3.0
    up = (
        np.einsum("cadb->abcd", dgam)
        - np.einsum("dacb->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    g = amb.metric(t)
    down = np.einsum("am,mbcd->abcd", g, up)
    ricci = np.einsum("abad->bd", up)
    return AmbientCurvature(float(t), down, ricci, h)


@dataclass(frozen=True)
class MeanCurvatureCheck:
    residual: float
    dH_dt: float
    ricci_nn: float
    hbar_sq: float


def verify_mean_curvature_identity(amb, t, step=None):
    """Residual of ``dH/dt = Ric(nu, nu) + |hbar|^2`` for the slices, normal Gaussian coordinates only."""
    if not amb.psi.is_zero:
        raise UnsupportedConfiguration("mean-curvature identity requires psi == 0")
    h = _default_step(amb) if step is None else step
    amb.check_time([t - h, t + h], "stencil point")

    def mean(tt):
        return amb.n * level_second_fundamental(amb, tt)[1]

    def central(hh):
        return (mean(t + hh) - mean(t - hh)) / (2 * hh)

    dH = (4.0 * central(h / 2) - central(h)) / 3.0
    curv = riemann_numeric(amb, t, step=h)
    nu = np.zeros(amb.n + 1)
    nu[0] = -1.0
    ricci_nn = float(nu @ curv.ricci @ nu)
    kb = level_second_fundamental(amb, t)[1]
    hbar_sq = amb.n * kb**2
    return MeanCurvatureCheck(abs(dH - (ricci_nn + hbar_sq)), float(dH), ricci_nn, hbar_sq)


def _sobol(dim, count, seed):
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(count)


def _sphere_points(dim, count, seed):
    """Quasi-random points on the unit sphere in R^dim (cosines of Gaussian projections)."""
    from scipy.special import ndtri

    raw = _sobol(dim, count, seed)
    gauss = ndtri(np.clip(raw, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    return gauss / np.where(norms == 0, 1.0, norms)


@dataclass(frozen=True)
class TimelikeVerdict:
    holds: bool
    min_value: float
    witness: list | None
    samples: int
    seed: int


def timelike_convergence_sample(amb, t, samples=4096, seed=0, tol=1e-9):
    """Sample ``Ric(xi, xi)`` over reference-normalised future time-like ``xi``.

    The first sample is always the slice normal direction ``(1, 0, ..., 0)``.
    """
    curv = riemann_numeric(amb, t)
    n = amb.n
    phi = amb.warp.phi(t)
    raw = _sobol(n + 1, samples, seed)
    speed = 0.999 * raw[:, 0]
    if n == 1:
        directions = np.where(raw[:, 1:] < 0.5, -1.0, 1.0)
    else:
        directions = _sphere_points(n, samples, seed + 1)
    xi = np.empty((samples, n + 1))
    xi[:, 0] = 1.0
    xi[:, 1:] = speed[:, None] * directions / phi
    xi[0] = 0.0
    xi[0, 0] = 1.0
    gt = reference_metric(amb, t)
    xi /= np.sqrt(np.einsum("sa,ab,sb->s", xi, gt, xi))[:, None]
    values = np.einsum("sa,ab,sb->s", xi, curv.ricci, xi)
    k = int(np.argmin(values))
    vmin = float(values[k])
    scale = max(1.0, float(np.max(np.abs(curv.ricci))))
    holds = vmin >= -tol * scale
    return TimelikeVerdict(holds, vmin, None if holds else xi[k].tolist(), samples, seed)


@dataclass
class ChiReport:
    lam: float
    region: tuple
    c0: float
    min_sampled: float
    positive_definite: bool
    c_floor: float
    samples: int
    seed: int
    hessian: Callable = field(repr=False)

    def to_dict(self):
        return {
            "lambda": self.lam,
            "region": list(self.region),
            "c0": self.c0,
            "min_sampled": self.min_sampled,
            "positive_definite": self.positive_definite,
            "c_floor": self.c_floor,
            "samples": self.samples,
            "seed": self.seed,
        }


def convex_chi(amb, region=None, lam=1.0, samples=4096, seed=0, times=33, c_floor=1e-3):
    """Convexity report for ``chi = exp(lam * t)``.

    ``c0`` is the smallest generalised eigenvalue of the ambient Hessian of
    chi relative to the reference metric over ``times`` slices of
    ``region``; the verdict is ``c0 > c_floor``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    region = tuple(amb.slab if region is None else region)
    amb.check_time(region, "region end")
    n = amb.n
    dt = np.zeros(n + 1)
    dt[0] = 1.0

    def hessian(t):
        t_hess = -christoffels(amb, t).gamma[0]
        e = np.exp(lam * t)
        return lam**2 * e * np.outer(dt, dt) + lam * e * t_hess

    eta = _sphere_points(n + 1, samples, seed)
    c0 = np.inf
    sampled = np.inf
    for t in np.linspace(region[0], region[1], times):
        hess = hessian(t)
        gt = reference_metric(amb, t)
        c0 = min(c0, float(linalg.eigh(hess, gt, eigvals_only=True)[0]))
        unit = eta / np.sqrt(np.einsum("sa,ab,sb->s", eta, gt, eta))[:, None]
        sampled = min(sampled, float(np.min(np.einsum("sa,ab,sb->s", unit, hess, unit))))
    return ChiReport(lam, region, c0, sampled, bool(c0 > c_floor), c_floor, samples, seed, hessian)


def reference_metric(amb, t):
    """Riemannian reference metric ``e^{2 psi}(dt^2 + sigma)``."""
    g = amb.metric(t)
    g[0, 0] = -g[0, 0]
    return g


def ambient_from_spec(spec):
    """Rebuild a :class:`WarpedAmbient` from the dictionary produced by ``describe``."""
    warp = spec["warp"]
    if isinstance(warp, str):
        warp = {"name": warp}
    warp = dict(warp)
    if "knots" in warp:
        w = Warp.spline(warp["knots"], warp["values"])
    else:
        name = warp.pop("name")
        w = Warp.from_name(name, **warp)
    psi = spec.get("psi", 0.0)
    if isinstance(psi, (int, float)):
        psi = ConformalFactor(float(psi), 0.0)
    else:
        psi = ConformalFactor(*map(float, psi))
    return WarpedAmbient(int(spec["dimension"]), w, psi, tuple(map(float, spec["slab"])))
