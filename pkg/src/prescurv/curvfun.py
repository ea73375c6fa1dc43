"""Symmetric curvature functions on the positive cone and class certifiers.

Every function is vectorised over leading axes: ``kappa`` has shape
``(..., n)``, ``grad`` returns ``(..., n)`` and ``hess`` ``(..., n, n)``.

The certifiers sample the cone (or symmetric positive definite matrices)
with a seeded generator and report worst margins; none of them prove
anything.
"""

from __future__ import annotations

import ast
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import special_ortho_group

from .errors import ConeViolation

__all__ = [
    "CurvatureFunction",
    "ElemSym",
    "SigmaK",
    "InvSigmaK",
    "GaussK",
    "Power",
    "Product",
    "Normalized",
    "parse_family",
    "MatrixEval",
    "eval_matrix",
    "ConcavityResult",
    "check_concavity_c1",
    "OrderingResult",
    "check_ordering",
    "Epsilon0Result",
    "estimate_epsilon0",
    "ClassReport",
    "classify",
    "KSTAR_THRESHOLD",
]

KSTAR_THRESHOLD = 1e-3
DEGENERATE_GAP = 1e-8


def _as_cone_point(kappa, n):
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape[-1:] != (n,):
        raise ValueError(f"expected trailing dimension {n}, got shape {kappa.shape}")
    if not np.all(kappa > 0):
        raise ConeViolation("curvature function evaluated outside the open positive cone")
    return kappa


class CurvatureFunction:
    """Base class: subclasses implement ``_value``, ``_grad`` and ``_hess`` on cone points."""

    n: int
    degree: float
    builtin = False

    def value(self, kappa):
        return self._value(_as_cone_point(kappa, self.n))

    __call__ = value

    def grad(self, kappa):
        return self._grad(_as_cone_point(kappa, self.n))

    def hess(self, kappa):
        return self._hess(_as_cone_point(kappa, self.n))

    def at_identity(self):
        return float(self._value(np.ones(self.n)))

    def __repr__(self):
        return self.expr

    @property
    def expr(self):
        return type(self).__name__


def _esym(kappa, kmax):
    """e_0 .. e_kmax of the trailing axis by the usual one-variable-at-a-time recurrence."""
    e = np.zeros(kappa.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for i in range(kappa.shape[-1]):
        x = kappa[..., i : i + 1]
        e[..., 1:] = e[..., 1:] + x * e[..., :-1]
    return e


class ElemSym(CurvatureFunction):
    """Elementary symmetric polynomial ``H_k``."""

    builtin = True

    def __init__(self, k, n):
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        self.k, self.n, self.degree = int(k), int(n), float(k)

    @property
    def expr(self):
        return f"elem({self.k})"

    def _value(self, kappa):
        return _esym(kappa, self.k)[..., self.k]

    def _grad(self, kappa):
        out = np.empty_like(kappa)
        if self.k == 1:
            out[...] = 1.0
            return out
        for i in range(self.n):
            rest = np.delete(kappa, i, axis=-1)
            out[..., i] = _esym(rest, self.k - 1)[..., self.k - 1]
        return out

    def _hess(self, kappa):
        out = np.zeros(kappa.shape + (self.n,))
        if self.k < 2:
            return out
        for i in range(self.n):
            for j in range(i + 1, self.n):
                rest = np.delete(kappa, [i, j], axis=-1)
                val = _esym(rest, self.k - 2)[..., self.k - 2]
                out[..., i, j] = out[..., j, i] = val
        return out


class SigmaK(CurvatureFunction):
    """``H_k^{1/k}``."""

    builtin = True

    def __init__(self, k, n):
        self.base = ElemSym(k, n)
        self.k, self.n, self.degree = int(k), int(n), 1.0

    @property
    def expr(self):
        return f"sigma({self.k})"

    def _value(self, kappa):
        return self.base._value(kappa) ** (1.0 / self.k)

    def _grad(self, kappa):
        hk = self.base._value(kappa)
        return (hk ** (1.0 / self.k - 1.0) / self.k)[..., None] * self.base._grad(kappa)

    def _hess(self, kappa):
        k = self.k
        hk = self.base._value(kappa)[..., None, None]
        g = self.base._grad(kappa)
        return hk ** (1.0 / k - 1.0) / k * self.base._hess(kappa) + (
            (1.0 / k) * (1.0 / k - 1.0) * hk ** (1.0 / k - 2.0)
        ) * g[..., :, None] * g[..., None, :]


class InvSigmaK(CurvatureFunction):
    """``1 / sigma_k(1/kappa)``."""

    builtin = True

    def __init__(self, k, n):
        self.inner = SigmaK(k, n)
        self.k, self.n, self.degree = int(k), int(n), 1.0

    @property
    def expr(self):
        return f"invsigma({self.k})"

    def _value(self, kappa):
        return 1.0 / self.inner._value(1.0 / kappa)

    def _grad(self, kappa):
        y = 1.0 / kappa
        s = self.inner._value(y)[..., None]
        return self.inner._grad(y) * y**2 / s**2

    def _hess(self, kappa):
        y = 1.0 / kappa
        s = self.inner._value(y)[..., None, None]
        sg = self.inner._grad(y)
        sh = self.inner._hess(y)
        y2 = y**2
        outer = (sg * y2)[..., :, None] * (sg * y2)[..., None, :]
        out = 2.0 * outer / s**3 - sh * y2[..., :, None] * y2[..., None, :] / s**2
        diag = -2.0 * sg * y**3 / s[..., 0] ** 2
        return out + diag[..., :, None] * np.eye(self.n)


class GaussK(CurvatureFunction):
    """``(kappa_1 ... kappa_n)^{1/n}``."""

    builtin = True

    def __init__(self, n):
        self.n, self.degree = int(n), 1.0

    @property
    def expr(self):
        return "K"

    def _value(self, kappa):
        return np.exp(np.mean(np.log(kappa), axis=-1))

    def _grad(self, kappa):
        return self._value(kappa)[..., None] / (self.n * kappa)

    def _hess(self, kappa):
        f = self._value(kappa)[..., None, None]
        inv = 1.0 / kappa
        return f * (inv[..., :, None] * inv[..., None, :] / self.n**2 - np.eye(self.n) * (inv**2)[..., None] / self.n)


class Power(CurvatureFunction):
    builtin = True

    def __init__(self, base, r):
        if r <= 0:
            raise ValueError("power must be positive")
        self.base, self.r = base, float(r)
        self.n, self.degree = base.n, base.degree * self.r
        self.builtin = base.builtin

    @property
    def expr(self):
        return f"power({self.base.expr},{self.r:g})"

    def _value(self, kappa):
        return self.base._value(kappa) ** self.r

    def _grad(self, kappa):
        f = self.base._value(kappa)[..., None]
        return self.r * f ** (self.r - 1.0) * self.base._grad(kappa)

    def _hess(self, kappa):
        r = self.r
        f = self.base._value(kappa)[..., None, None]
        g = self.base._grad(kappa)
        return r * f ** (r - 1.0) * self.base._hess(kappa) + r * (r - 1.0) * f ** (r - 2.0) * (
            g[..., :, None] * g[..., None, :]
        )


class Product(CurvatureFunction):
    builtin = True

    def __init__(self, first, second):
        if first.n != second.n:
            raise ValueError("factors must share the argument dimension")
        self.first, self.second = first, second
        self.n = first.n
        self.degree = first.degree + second.degree
        self.builtin = first.builtin and second.builtin

    @property
    def expr(self):
        return f"product({self.first.expr},{self.second.expr})"

    def _value(self, kappa):
        return self.first._value(kappa) * self.second._value(kappa)

    def _grad(self, kappa):
        a, b = self.first, self.second
        return a._grad(kappa) * b._value(kappa)[..., None] + a._value(kappa)[..., None] * b._grad(kappa)

    def _hess(self, kappa):
        a, b = self.first, self.second
        fa, fb = a._value(kappa)[..., None, None], b._value(kappa)[..., None, None]
        ga, gb = a._grad(kappa), b._grad(kappa)
        cross = ga[..., :, None] * gb[..., None, :]
        return a._hess(kappa) * fb + cross + np.swapaxes(cross, -1, -2) + fa * b._hess(kappa)


class Normalized(CurvatureFunction):
    """``F / F(1, ..., 1)``."""

    builtin = True

    def __init__(self, base):
        self.base = base
        self.n, self.degree = base.n, base.degree
        self.builtin = base.builtin
        self.scale = base.at_identity()

    @property
    def expr(self):
        return f"normalized({self.base.expr})"

    def _value(self, kappa):
        return self.base._value(kappa) / self.scale

    def _grad(self, kappa):
        return self.base._grad(kappa) / self.scale

    def _hess(self, kappa):
        return self.base._hess(kappa) / self.scale


# -- composition expressions -------------------------------------------------

_BARE = {
    "K": lambda n: GaussK(n),
    "gauss": lambda n: GaussK(n),
    "gaussk": lambda n: GaussK(n),
    "H": lambda n: SigmaK(1, n),
    "sigma": lambda n: SigmaK(1, n),
    "invsigma": lambda n: InvSigmaK(1, n),
    "elem": lambda n: ElemSym(1, n),
}


def parse_family(text, n):
    """Build a curvature function from an expression such as ``product(power(sigma,2),K)``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse curvature expression {text!r}") from exc

    def number(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        raise ValueError(f"expected a number in {text!r}")

    def build(node):
        if isinstance(node, ast.Name):
            key = node.id if node.id in _BARE else node.id.lower()
            if key not in _BARE:
                raise ValueError(f"unknown curvature function {node.id!r}")
            return _BARE[key](n)
        if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)) or node.keywords:
            raise ValueError(f"unsupported construct in {text!r}")
        name, args = node.func.id.lower(), node.args
        if name in ("elem", "elemsym") and len(args) == 1:
            return ElemSym(int(number(args[0])), n)
        if name in ("sigma", "sigmak") and len(args) == 1:
            return SigmaK(int(number(args[0])), n)
        if name in ("invsigma", "invsigmak") and len(args) == 1:
            return InvSigmaK(int(number(args[0])), n)
        if name in ("k", "gauss", "gaussk") and not args:
            return GaussK(n)
        if name == "power" and len(args) == 2:
            return Power(build(args[0]), number(args[1]))
        if name == "product" and len(args) >= 2:
            out = build(args[0])
            for arg in args[1:]:
                out = Product(out, build(arg))
            return out
        if name == "normalized" and len(args) == 1:
            return Normalized(build(args[0]))
        raise ValueError(f"bad call {name}({len(args)} args) in {text!r}")

    return build(tree.body)


# -- matrix-level evaluation -------------------------------------------------


def divided_differences(func, kappa, fi=None, fij=None):
    """Matrix of ``(F_i - F_j)/(k_i - k_j)``, replaced by ``F_ii - F_ij`` on (near) ties."""
    fi = func._grad(kappa) if fi is None else fi
    fij = func._hess(kappa) if fij is None else fij
    dk = kappa[..., :, None] - kappa[..., None, :]
    df = fi[..., :, None] - fi[..., None, :]
    scale = np.max(kappa, axis=-1)[..., None, None]
    tied = np.abs(dk) < DEGENERATE_GAP * scale
    diag = np.diagonal(fij, axis1=-2, axis2=-1)
    limit = diag[..., :, None] - fij
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(tied, limit, df / np.where(tied, 1.0, dk))
    return quot


@dataclass
class MatrixEval:
    value: np.ndarray
    grad: np.ndarray
    kappa: np.ndarray
    frame: np.ndarray
    fi: np.ndarray
    fij: np.ndarray
    dd: np.ndarray

    def _rotate(self, eta):
        q = self.frame
        return np.swapaxes(q, -1, -2) @ np.asarray(eta, dtype=float) @ q

    def second(self, eta):
        """Second-derivative quadratic form in ``eta``, evaluated in the eigenframe."""
        et = self._rotate(eta)
        diag = np.diagonal(et, axis1=-2, axis2=-1)
        off = et**2
        n = self.kappa.shape[-1]
        mask = 1.0 - np.eye(n)
        return np.einsum("...ij,...i,...j->...", self.fij, diag, diag) + np.sum(self.dd * off * mask, axis=(-1, -2))

    def first(self, eta):
        et = self._rotate(eta)
        return np.einsum("...i,...ii->...", self.fi, et)

    def concavity_rhs(self, eta):
        """``F^{-1}(F^{ij} eta_ij)^2 - F^{ik} htilde^{jl} eta_ij eta_kl``."""
        et = self._rotate(eta)
        lin = np.einsum("...i,...ii->...", self.fi, et)
        cross = np.einsum("...i,...j,...ij->...", self.fi, 1.0 / self.kappa, et**2)
        return lin**2 / self.value - cross

    def largest_eigen_rhs(self, eta):
        """``F^{-1}(F^{ij} eta_ij)^2 - kappa_r^{-1} F^{ij} eta_ir eta_jr`` with kappa_r the largest eigenvalue."""
        et = self._rotate(eta)
        lin = np.einsum("...i,...ii->...", self.fi, et)
        col = et[..., :, -1]
        return lin**2 / self.value - np.sum(self.fi * col**2, axis=-1) / self.kappa[..., -1]


def eval_matrix(func, h):
    """Evaluate ``func`` on symmetric positive definite matrices ``h`` (shape ``(..., n, n)``)."""
    h = np.asarray(h, dtype=float)
    if h.shape[-2:] != (func.n, func.n):
        raise ValueError(f"expected trailing shape ({func.n}, {func.n}), got {h.shape}")
    if not np.allclose(h, np.swapaxes(h, -1, -2), rtol=1e-12, atol=1e-14):
        raise ConeViolation("matrix argument is not symmetric")
    kappa, frame = np.linalg.eigh(h)
    if not np.all(kappa > 0):
        raise ConeViolation("matrix argument is not positive definite")
    fi = func._grad(kappa)
    fij = func._hess(kappa)
    grad = np.einsum("...ik,...k,...jk->...ij", frame, fi, frame)
    dd = divided_differences(func, kappa, fi, fij)
    return MatrixEval(func._value(kappa), grad, kappa, frame, fi, fij, dd)


# -- sampling ------------------------------------------------------------------


def sample_cone(n, count, rng, spread=3.0, degenerate_fraction=0.1):
    """Log-uniform cone points with a slice of nearly or exactly tied coordinates."""
    kappa = np.exp(rng.uniform(-spread, spread, size=(count, n)))
    m = int(count * degenerate_fraction)
    if n > 1 and m:
        gaps = np.array([0.0, 1e-11, 1e-7, 1e-5])[rng.integers(0, 4, size=m)]
        kappa[:m, 1] = kappa[:m, 0] * (1.0 + gaps)
    return kappa


def sample_spd(n, count, rng, spread=3.0):
    kappa = sample_cone(n, count, rng, spread)
    if n == 1:
        q = np.ones((count, 1, 1))
    else:
        q = special_ortho_group.rvs(n, size=count, random_state=rng).reshape(count, n, n)
    h = np.einsum("sik,sk,sjk->sij", q, kappa, q)
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def sample_symmetric(n, count, rng):
    eta = rng.normal(size=(count, n, n))
    return 0.5 * (eta + np.swapaxes(eta, -1, -2))


# -- certifiers ------------------------------------------------------------------


@dataclass
class ConcavityResult:
    passed: bool
    worst_margin: float
    equality_gap: float
    samples: int
    witness: dict | None = None


def check_concavity_c1(func, samples=10_000, seed=0, tol=1e-7, largest_eigen=False):
    """Sample the c = 1 concavity inequality for log F at random ``(h, eta)``.

    Margins are normalised by ``F * sum(eta_ij^2 / (kappa_i kappa_j))`` in the
    eigenframe. ``equality_gap`` is the normalised gap at ``eta = h``, which
    must vanish for any homogeneous function. With ``largest_eigen`` the
    weaker bound using only the largest eigenvalue is sampled instead.
    """
    rng = np.random.default_rng(seed)
    h = sample_spd(func.n, samples, rng)
    eta = sample_symmetric(func.n, samples, rng)
    me = eval_matrix(func, h)
    rhs = me.largest_eigen_rhs(eta) if largest_eigen else me.concavity_rhs(eta)
    lhs = me.second(eta)
    et = me._rotate(eta)
    inv = 1.0 / me.kappa
    scale = me.value * np.einsum("si,sj,sij->s", inv, inv, et**2)
    margin = (rhs - lhs) / scale
    k = int(np.argmin(margin))
    worst = float(margin[k])

    eq_lhs = me.second(h)
    eq_rhs = me.largest_eigen_rhs(h) if largest_eigen else me.concavity_rhs(h)
    gap = float(np.max(np.abs(eq_rhs - eq_lhs) / (me.value * func.n)))

    passed = worst >= -tol
    witness = None
    if not passed:
        witness = {"h": h[k].tolist(), "eta": eta[k].tolist(), "margin": worst}
    return ConcavityResult(bool(passed), worst, gap, samples, witness)


@dataclass
class OrderingResult:
    passed: bool
    margin: float
    samples: int
    witness: list | None = None


def check_ordering(func, samples=10_000, seed=0, tol=1e-10):
    """Signed margin of ``F_i k_i <= F_j k_j`` whenever ``k_j <= k_i`` (normalised by F)."""
    rng = np.random.default_rng(seed)
    kappa = np.sort(sample_cone(func.n, samples, rng), axis=-1)
    share = func.grad(kappa) * kappa / func.value(kappa)[..., None]
    # sorted ascending: for every j < i the margin is share_j - share_i
    diff = share[:, :, None] - share[:, None, :]
    lower = np.tril_indices(func.n, -1)
    pair_margin = -diff[:, lower[0], lower[1]] if func.n > 1 else np.zeros((samples, 1))
    per_sample = pair_margin.min(axis=-1)
    k = int(np.argmin(per_sample))
    margin = float(per_sample[k])
    passed = margin >= -tol
    return OrderingResult(bool(passed), margin, samples, None if passed else kappa[k].tolist())


def _ratio(func, kappa):
    fi = func.grad(kappa)
    return np.sum(fi * kappa**2, axis=-1) / (func.value(kappa) * np.sum(kappa, axis=-1))


@dataclass
class Epsilon0Result:
    epsilon0: float
    interior_inf: float
    boundary_inf: float
    upper_bound_ok: bool
    max_ratio: float
    argmin: list
    boundary_levels: list = field(default_factory=list)
    umbilic: float = float("nan")

    @property
    def boundary_ratio(self):
        """Boundary infimum relative to the value at the umbilic point."""
        return self.boundary_inf / self.umbilic

    @property
    def in_kstar(self):
        return self.interior_inf >= KSTAR_THRESHOLD and self.boundary_inf >= 0.5 * self.interior_inf


def estimate_epsilon0(func, samples=10_000, boundary_refinement=8, seed=0):
    """Infimum of ``F^{ij} h_ik h^k_j / (F H)`` over the cone, normalised to ``H = 1``.

    Interior points come from a flat Dirichlet distribution plus the
    barycentre, polished by a local minimisation; the boundary pass pushes
    the smallest coordinate down to ``10^-boundary_refinement``.
    """
    n = func.n
    rng = np.random.default_rng(seed)
    interior = rng.dirichlet(np.ones(n), size=samples)
    interior = interior[np.min(interior, axis=-1) > 1e-3]
    interior = np.vstack([np.full((1, n), 1.0 / n), interior])
    ratios = _ratio(func, interior)

    best = interior[np.argsort(ratios)[: min(5, len(ratios))]]

    def objective(z):
        p = np.exp(z - np.max(z))
        p /= p.sum()
        if np.min(p) <= 1e-9:
            return np.inf
        return float(_ratio(func, p))

    polished = []
    for start in best:
        res = optimize.minimize(
            objective, np.log(start), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14}
        )
        p = np.exp(res.x - np.max(res.x))
        polished.append(p / p.sum())
    polished = np.asarray(polished)
    cand = np.vstack([interior, polished])
    cand_ratio = _ratio(func, cand)
    k = int(np.argmin(cand_ratio))
    interior_inf = float(cand_ratio[k])

    levels = []
    per_level = 64
    boundary_inf = np.inf
    for m in range(1, boundary_refinement + 1):
        delta = 10.0**-m
        rest = rng.dirichlet(np.ones(max(n - 1, 1)), size=per_level) * (1.0 - delta)
        pts = np.hstack([np.full((per_level, 1), delta), rest]) if n > 1 else np.ones((per_level, 1))
        r = float(np.min(_ratio(func, pts)))
        levels.append({"delta": delta, "min_ratio": r})
        boundary_inf = min(boundary_inf, r)

    all_ratio = np.concatenate([cand_ratio, [lv["min_ratio"] for lv in levels]])
    max_ratio = float(np.max(_ratio(func, interior)))
    upper_ok = max_ratio <= func.degree * (1 + 1e-10)
    return Epsilon0Result(
        float(np.min(all_ratio)),
        interior_inf,
        float(boundary_inf),
        bool(upper_ok),
        max_ratio,
        cand[k].tolist(),
        levels,
        float(ratios[0]),
    )


def boundary_vanishing(func, rays=64, seed=0, depth=12, threshold=1e-3):
    """Check that F decays to 0 along rays where the smallest coordinate goes to 0."""
    rng = np.random.default_rng(seed)
    start = np.exp(rng.uniform(-1, 1, size=(rays, func.n)))
    f0 = func.value(start)
    end = start.copy()
    end[:, 0] *= 10.0**-depth
    ratio = func.value(end) / f0
    return bool(np.all(ratio <= threshold)), float(np.max(ratio))


def euler_share_min(func, samples=10_000, seed=0):
    """``min_i F_i kappa_i / F`` over sampled cone points, including near-boundary ones."""
    rng = np.random.default_rng(seed)
    kappa = sample_cone(func.n, samples, rng, spread=6.0)
    return float(np.min(func.grad(kappa) * kappa / func.value(kappa)[..., None]))


@dataclass
class ClassReport:
    family: str
    n: int
    degree: float
    monotone: bool
    boundary_vanishing: bool
    boundary_ratio: float
    concavity_c1: bool
    concavity_margin: float
    equality_gap: float
    ordering: bool
    ordering_margin: float
    largest_eigen_bound: bool
    kstar_epsilon0: float
    kstar_interior_inf: float
    kstar_boundary_inf: float
    kstar_boundary_ratio: float
    upper_bound_ok: bool
    euler_share_min: float
    in_K: bool
    in_Kstar: bool
    kstar_threshold: float = KSTAR_THRESHOLD
    samples: int = 0
    seed: int = 0
    builtin: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def classify(func, samples=10_000, seed=0):
    """Run every certifier on ``func`` and combine them into (K) / (K*) verdicts."""
    rng = np.random.default_rng(seed)
    kappa = sample_cone(func.n, samples, rng, spread=6.0)
    monotone = bool(np.all(func.grad(kappa) > 0))
    vanish, vanish_ratio = boundary_vanishing(func, seed=seed)
    conc = check_concavity_c1(func, samples, seed)
    order = check_ordering(func, samples, seed)
    bound = check_concavity_c1(func, samples, seed, largest_eigen=True)
    eps = estimate_epsilon0(func, samples, seed=seed)
    share = euler_share_min(func, samples, seed)

    notes = []
    if func.builtin:
        boundary_gate = vanish
    else:
        boundary_gate = True
        notes.append("boundary vanishing is report-only for user-supplied functions")
    if not order.passed:
        notes.append("ordering F_i k_i <= F_j k_j for k_j <= k_i violated; signed margin reported")
    in_k = monotone and boundary_gate and conc.passed and order.passed
    in_kstar = in_k and eps.in_kstar
    return ClassReport(
        family=func.expr,
        n=func.n,
        degree=func.degree,
        monotone=monotone,
        boundary_vanishing=vanish,
        boundary_ratio=vanish_ratio,
        concavity_c1=conc.passed,
        concavity_margin=conc.worst_margin,
        equality_gap=conc.equality_gap,
        ordering=order.passed,
        ordering_margin=order.margin,
        largest_eigen_bound=bound.passed,
        kstar_epsilon0=eps.epsilon0,
        kstar_interior_inf=eps.interior_inf,
        kstar_boundary_inf=eps.boundary_inf,
        kstar_boundary_ratio=eps.boundary_ratio,
        upper_bound_ok=eps.upper_bound_ok,
        euler_share_min=share,
        in_K=bool(in_k),
        in_Kstar=bool(in_kstar),
        samples=samples,
        seed=seed,
        builtin=func.builtin,
        notes=notes,
    )


def level_value(func, kappa_bar):
    """F at the umbilic point ``(kappa_bar, ..., kappa_bar)``; uses homogeneity."""
    return func.at_identity() * np.asarray(kappa_bar, dtype=float) ** func.degree

