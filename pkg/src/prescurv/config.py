"""Run configuration: TOML schema, built-in scenarios and assembly of a :class:`FlowConfig`.

A configuration has the sections ``ambient``, ``grid``, ``curvature``,
``prescription``, ``barriers``, ``flow`` and ``output`` plus the top-level
keys ``scenario`` and ``seed``. A named scenario supplies defaults that the
remaining keys override. Unknown keys are rejected and every error carries
the line of the offending key when it can be located.
"""

from __future__ import annotations

import copy
import os
import re
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .ambient import ConformalFactor, Warp, WarpedAmbient
from .curvfun import parse_family
from .errors import ConfigError
from .flow import BarrierPair, FlowConfig, Phi, Prescription, trig_field
from .hypersurface import PeriodicGrid

__all__ = ["SCENARIOS", "RunConfig", "parse_config", "load_config", "scenario_config", "field_from_spec"]

_BARRIERS = {"lower": {"value": 1.0}, "upper": {"value": 2.0}}

SCENARIOS = {
    "flrw-gauss-constant": {
        "ambient": {"dimension": 2, "warp": "gauss_decay", "slab": [0.5, 2.5]},
        "grid": {"resolution": 32},
        "curvature": {"family": "K"},
        "prescription": {"value": 1.5},
        "barriers": copy.deepcopy(_BARRIERS),
        "flow": {"scheme": "ssprk3", "tolerance": 1e-7},
    },
    "flrw-gauss-cosine": {
        "ambient": {"dimension": 2, "warp": "gauss_decay", "slab": [0.5, 2.5]},
        "grid": {"resolution": 32},
        "curvature": {"family": "K"},
        "prescription": {"value": 1.5, "modes": [[0.1, 1, 1]]},
        "barriers": copy.deepcopy(_BARRIERS),
        "flow": {"scheme": "ssprk3", "tolerance": 1e-6},
    },
}

_SCHEMA = {
    "ambient": {"dimension", "warp", "warp_value", "knots", "values", "psi", "slab"},
    "grid": {"resolution"},
    "curvature": {"family"},
    "prescription": {"value", "modes", "phi", "m"},
    "barriers": {"lower", "upper"},
    "flow": {
        "safety", "tolerance", "max_steps", "scheme", "unsafe_init", "monitors",
        "probes", "snapshot_every", "initial",
    },
    "output": {"dir", "figures", "fields_csv"},
}
_FIELD_KEYS = {"value", "modes"}
_MONITORS = {"sign", "descent", "containment", "convexity", "vtilde"}
_FLOW_DEFAULTS = {
    "safety": 0.9,
    "tolerance": 1e-6,
    "max_steps": 200_000,
    "scheme": "euler",
    "unsafe_init": False,
    "monitors": {k: True for k in sorted(_MONITORS)},
    "probes": [],
    "snapshot_every": 0,
}
_OUTPUT_DEFAULTS = {"figures": False, "fields_csv": False}


class _Locator:
    """Finds the source line of ``section.key`` in the raw TOML text."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def __call__(self, section=None, key=None):
        current = None
        for no, line in enumerate(self.lines, start=1):
            s = line.strip()
            m = re.match(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]", s)
            if m:
                current = m.group(1)
                if key is None and current == section:
                    return no
                continue
            if key is None:
                continue
            m = re.match(r"^([A-Za-z0-9_.\-\"]+)\s*=", s)
            if not m:
                continue
            name = m.group(1).strip('"')
            if section is None and current is None and name == key:
                return no
            if current == section and name == key:
                return no
            if current is None and name == f"{section}.{key}":
                return no
        return None


def _deep_merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _number(value, what, where, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number", where)
    if integer and not isinstance(value, int):
        raise ConfigError(f"{what} must be an integer", where)
    return value


def field_from_spec(spec, grid, what="field"):
    """Node values of ``{value, modes}`` (a number is shorthand for a constant)."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.full(grid.shape, float(spec))
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float).reshape(grid.shape)
    return trig_field(grid, spec.get("value", 0.0), [tuple(m) for m in spec.get("modes", [])])


@dataclass
class RunConfig:
    """Validated, fully resolved configuration (plain data)."""

    resolved: dict
    seed: int

    @property
    def output(self):
        return self.resolved["output"]

    def ambient(self):
        a = self.resolved["ambient"]
        name = a["warp"]
        if name == "spline":
            warp = Warp.spline(a["knots"], a["values"])
        elif name == "const":
            warp = Warp.const(a.get("warp_value", 1.0))
        else:
            warp = Warp.from_name(name)
        psi = ConformalFactor(*a.get("psi", [0.0, 0.0]))
        return WarpedAmbient(a["dimension"], warp, psi, tuple(a["slab"]))

    def grid(self):
        n = self.resolved["ambient"]["dimension"]
        res = self.resolved["grid"]["resolution"]
        res = (res,) * n if isinstance(res, int) else tuple(res)
        return PeriodicGrid(n, res)

    def build(self):
        """Assemble the :class:`FlowConfig` described by this configuration."""
        r = self.resolved
        amb = self.ambient()
        grid = self.grid()
        func = parse_family(r["curvature"]["family"], amb.n)
        p = r["prescription"]
        phi = Phi(p.get("phi", "log"), float(p.get("m", 1.0)))
        if p.get("modes"):
            presc = Prescription.with_modes(p["value"], p["modes"], phi)
        else:
            presc = Prescription.constant(p["value"], phi)
        b = r["barriers"]
        barriers = BarrierPair(field_from_spec(b["lower"], grid), field_from_spec(b["upper"], grid))
        f = r["flow"]
        initial = field_from_spec(f["initial"], grid) if "initial" in f else None
        return FlowConfig(
            ambient=amb,
            grid=grid,
            func=func,
            prescription=presc,
            barriers=barriers,
            safety=f["safety"],
            tolerance=f["tolerance"],
            max_steps=f["max_steps"],
            scheme=f["scheme"],
            unsafe_init=f["unsafe_init"],
            initial=initial,
            monitors=dict(f["monitors"]),
            seed=self.seed,
            probes=tuple(tuple(p_) for p_ in f["probes"]),
            snapshot_every=f["snapshot_every"],
            resolved=copy.deepcopy(r) | {"seed": self.seed},
        )


def _validate(doc, loc):
    top = set(doc) - set(_SCHEMA) - {"scenario", "seed"}
    if top:
        key = sorted(top)[0]
        raise ConfigError(f"unknown key {key!r}", loc(None, key) or loc(key))
    for section, keys in _SCHEMA.items():
        if section not in doc:
            continue
        if not isinstance(doc[section], dict):
            raise ConfigError(f"{section!r} must be a table", loc(None, section))
        extra = set(doc[section]) - keys
        if extra:
            key = sorted(extra)[0]
            raise ConfigError(f"unknown key {section}.{key}", loc(section, key))


def _check_field(spec, what, where, n):
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return
    if isinstance(spec, list):
        return
    if not isinstance(spec, dict):
        raise ConfigError(f"{what} must be a number or a table with value/modes", where)
    extra = set(spec) - _FIELD_KEYS
    if extra:
        raise ConfigError(f"unknown key {what}.{sorted(extra)[0]}", where)
    _number(spec.get("value", 0.0), f"{what}.value", where)
    for mode in spec.get("modes", []):
        if not isinstance(mode, list) or len(mode) != n + 1:
            raise ConfigError(f"{what}.modes entries must be [amplitude, k1..k{n}]", where)


def _resolve(doc, loc, seed_override):
    if "scenario" in doc:
        name = doc["scenario"]
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r}; built-ins: {sorted(SCENARIOS)}", loc(None, "scenario"))
        base = SCENARIOS[name]
    else:
        base = {}
    body = {k: v for k, v in doc.items() if k not in ("scenario", "seed")}
    r = _deep_merge(base, body)
    for section in ("ambient", "prescription", "barriers"):
        if section not in r:
            raise ConfigError(f"missing section [{section}]")
    r.setdefault("grid", {}).setdefault("resolution", 32)
    r.setdefault("curvature", {}).setdefault("family", "K")
    r["flow"] = _deep_merge(_FLOW_DEFAULTS, r.get("flow", {}))
    r["output"] = _deep_merge(_OUTPUT_DEFAULTS, r.get("output", {}))
    if "scenario" in doc:
        r["scenario"] = doc["scenario"]

    a = r["ambient"]
    for key in ("dimension", "warp", "slab"):
        if key not in a:
            raise ConfigError(f"missing ambient.{key}", loc("ambient"))
    n = _number(a["dimension"], "ambient.dimension", loc("ambient", "dimension"), integer=True)
    if n not in (1, 2, 3):
        raise ConfigError(f"ambient.dimension = {n} not supported (supported: 1-3)", loc("ambient", "dimension"))
    if a["warp"] not in ("exp_decay", "gauss_decay", "const", "cosh", "spline"):
        raise ConfigError(f"unknown warp {a['warp']!r}", loc("ambient", "warp"))
    if a["warp"] == "spline" and not ("knots" in a and "values" in a):
        raise ConfigError("spline warp needs knots and values", loc("ambient", "warp"))
    slab = a["slab"]
    if not (isinstance(slab, list) and len(slab) == 2) or not slab[0] < slab[1]:
        raise ConfigError("ambient.slab must be [t_min, t_max] with t_min < t_max", loc("ambient", "slab"))
    if "psi" in a and not (isinstance(a["psi"], list) and len(a["psi"]) == 2):
        raise ConfigError("ambient.psi must be [a, b] for psi(t) = a + b t", loc("ambient", "psi"))

    res = r["grid"]["resolution"]
    where = loc("grid", "resolution")
    if isinstance(res, list):
        if len(res) != n:
            raise ConfigError(f"grid.resolution needs {n} entries", where)
        for v in res:
            _number(v, "grid.resolution", where, integer=True)
    else:
        _number(res, "grid.resolution", where, integer=True)
    if min(res if isinstance(res, list) else [res]) < 8:
        raise ConfigError("grid.resolution must be at least 8", where)

    p = r["prescription"]
    if "value" not in p:
        raise ConfigError("missing prescription.value", loc("prescription"))
    if _number(p["value"], "prescription.value", loc("prescription", "value")) <= 0:
        raise ConfigError("prescription.value must be positive", loc("prescription", "value"))
    _check_field({k: p[k] for k in ("value", "modes") if k in p}, "prescription", loc("prescription", "modes"), n)
    if p.get("phi", "log") not in ("log", "power"):
        raise ConfigError("prescription.phi must be 'log' or 'power'", loc("prescription", "phi"))
    if p.get("phi") == "power" and _number(p.get("m", 1.0), "prescription.m", loc("prescription", "m")) < 1:
        raise ConfigError("prescription.m must be >= 1", loc("prescription", "m"))

    for side in ("lower", "upper"):
        if side not in r["barriers"]:
            raise ConfigError(f"missing barriers.{side}", loc("barriers"))
        _check_field(r["barriers"][side], f"barriers.{side}", loc("barriers", side), n)

    f = r["flow"]
    safety = _number(f["safety"], "flow.safety", loc("flow", "safety"))
    if not 0 < safety <= 1:
        raise ConfigError("flow.safety must lie in (0, 1]", loc("flow", "safety"))
    if not _number(f["tolerance"], "flow.tolerance", loc("flow", "tolerance")) > 0:
        raise ConfigError("flow.tolerance must be positive", loc("flow", "tolerance"))
    if _number(f["max_steps"], "flow.max_steps", loc("flow", "max_steps"), integer=True) < 0:
        raise ConfigError("flow.max_steps must be non-negative", loc("flow", "max_steps"))
    if f["scheme"] not in ("euler", "ssprk3"):
        raise ConfigError("flow.scheme must be 'euler' or 'ssprk3'", loc("flow", "scheme"))
    if not isinstance(f["unsafe_init"], bool):
        raise ConfigError("flow.unsafe_init must be a boolean", loc("flow", "unsafe_init"))
    extra = set(f["monitors"]) - _MONITORS
    if extra:
        raise ConfigError(f"unknown monitor {sorted(extra)[0]!r}", loc("flow", "monitors"))
    if "initial" in f:
        _check_field(f["initial"], "flow.initial", loc("flow", "initial"), n)

    seed = doc.get("seed", 0)
    _number(seed, "seed", loc(None, "seed"), integer=True)
    if seed_override is not None:
        seed = seed_override
    return r, int(seed)


def _env_seed():
    raw = os.environ.get("PRESCURV_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"PRESCURV_SEED must be an integer, got {raw!r}") from None


def parse_config(text):
    """Parse and validate TOML text; raises :class:`ConfigError` with line information."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed TOML: {exc}", int(m.group(1)) if m else None) from None
    loc = _Locator(text)
    _validate(doc, loc)
    resolved, seed = _resolve(doc, loc, _env_seed())
    return RunConfig(resolved, seed)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def scenario_config(name, **flow_overrides):
    """RunConfig for a built-in scenario, optionally overriding ``[flow]`` keys."""
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; built-ins: {sorted(SCENARIOS)}")
    doc = {"scenario": name}
    if flow_overrides:
        doc["flow"] = flow_overrides
    resolved, seed = _resolve(doc, _Locator(""), _env_seed())
    return RunConfig(resolved, seed)
