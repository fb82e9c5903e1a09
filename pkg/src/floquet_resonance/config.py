"""Experiment configuration: a flat ``section.key = value`` text format.

See ``docs/config.md`` for the grammar.  :func:`parse_config` validates every
key and range; :func:`render_config` writes the canonical form, and
``parse(render(c)) == c``.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidModelError
from .grid import SpatialGrid
from .models import (BumpProfile, DrivenModel, GaussianProfile, GaussianWell, Harmonic, HarmonicPerturbation,
                     PoschlTeller, SampledPotential, StaticModel, ZeroPotential)
from .spectral import DEFAULT_DELTA_THR, DEFAULT_LADDER

# |alpha| * sum |coefficient| must stay below this; profiles are bounded by 1 and
# the sanity bound on the drive is half the binding energy, which is at most 1 for
# the supported wells at their default scale.
ALPHA_BOUND = 0.5

FAMILIES = ("poschl_teller", "gaussian_well", "zero", "sampled")
PROFILES = ("gaussian", "bump")


class ConfigError(InvalidModelError):
    """Invalid configuration text; ``line`` and ``key`` locate the problem when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class PotentialSpec:
    family: str
    depth: float = 2.0
    width: float = 1.0
    file: str | None = None
    state_index: int = 0


@dataclass(frozen=True)
class HarmonicSpec:
    label: str
    m: int = 1
    profile: str = "gaussian"
    center: float = 0.0
    width: float = 1.0
    coefficient: float = 1.0
    kind: str = "cos"


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    n_points: int


@dataclass(frozen=True)
class NumericsSpec:
    n_max: int = 8
    epsilon_ladder: tuple = DEFAULT_LADDER
    delta_thr: float = DEFAULT_DELTA_THR
    threshold_margin: float = 1e-2
    steps_per_period: int = 16
    launches: int | None = None
    prop_h: float = 0.2
    s_max: float | None = None
    decay_product: float = 1.2
    seed: int = 0
    trials: int = 100


@dataclass(frozen=True)
class ExperimentConfig:
    potential: PotentialSpec
    grid: GridSpec
    period: float
    harmonics: tuple = ()
    alphas: tuple = ()
    numerics: NumericsSpec = field(default_factory=NumericsSpec)
    output_directory: str = "results"

    def static_model(self) -> StaticModel:
        p = self.potential
        if p.family == "poschl_teller":
            V = PoschlTeller(p.depth, p.width)
        elif p.family == "gaussian_well":
            V = GaussianWell(p.depth, p.width)
        elif p.family == "zero":
            V = ZeroPotential()
        else:
            table = np.loadtxt(p.file, delimiter=None if not p.file.endswith(".csv") else ",", ndmin=2)
            V = SampledPotential(table[:, 0].copy(), table[:, 1].copy())
        return StaticModel(V, SpatialGrid.symmetric(self.grid.half_width, self.grid.n_points), p.state_index,
                           self.numerics.threshold_margin)

    def perturbation(self) -> HarmonicPerturbation:
        out = []
        for hs in self.harmonics:
            prof = GaussianProfile(hs.center, hs.width) if hs.profile == "gaussian" else BumpProfile(hs.center, hs.width)
            out.append(Harmonic(hs.m, prof, hs.coefficient, hs.kind))
        return HarmonicPerturbation(tuple(out))

    def model(self) -> DrivenModel:
        return DrivenModel(self.static_model(), self.perturbation(), self.period)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, numerics=replace(self.numerics, seed=int(seed)))


# ---------------------------------------------------------------------------
# value parsing

def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {text!r}")
    return v


def _int(text: str) -> int:
    v = _float(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _floats(text: str) -> tuple:
    items = [t.strip() for t in text.split(",") if t.strip()]
    return tuple(_float(t) for t in items)


def _choice(options):
    def conv(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


def _optional(conv):
    def wrapped(text: str):
        return None if text in ("auto", "none") else conv(text)
    return wrapped


_POTENTIAL_KEYS = {"family": _choice(FAMILIES), "depth": _float, "width": _float, "file": str, "state_index": _int}
_HARMONIC_KEYS = {"m": _int, "profile": _choice(PROFILES), "center": _float, "width": _float,
                  "coefficient": _float, "kind": _choice(("cos", "sin"))}
_GRID_KEYS = {"half_width": _float, "n_points": _int}
_DRIVE_KEYS = {"period": _float, "alphas": _floats}
_NUMERICS_KEYS = {"n_max": _int, "epsilon_ladder": _floats, "delta_thr": _float, "threshold_margin": _float,
                  "steps_per_period": _int, "launches": _optional(_int), "prop_h": _float,
                  "s_max": _optional(_float), "decay_product": _float, "seed": _int, "trials": _int}
_OUTPUT_KEYS = {"directory": str}


def _lookup(key: str):
    parts = key.split(".")
    sec = parts[0]
    if sec == "perturbation":
        if len(parts) == 4 and parts[1] == "harmonic" and parts[2] and parts[3] in _HARMONIC_KEYS:
            return ("harmonic", parts[2], parts[3]), _HARMONIC_KEYS[parts[3]]
        return None, None
    table = {"potential": _POTENTIAL_KEYS, "grid": _GRID_KEYS, "drive": _DRIVE_KEYS,
             "numerics": _NUMERICS_KEYS, "output": _OUTPUT_KEYS}.get(sec)
    if table is None or len(parts) != 2 or parts[1] not in table:
        return None, None
    return (sec, parts[1]), table[parts[1]]


def parse_text(text: str, base_dir: str = ".") -> ExperimentConfig:
    values, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", no)
        key, val = (s.strip() for s in line.split("=", 1))
        slot, conv = _lookup(key)
        if slot is None:
            raise ConfigError(f"unknown key: {key}", no, key)
        if slot in values:
            raise ConfigError(f"duplicate key: {key}", no, key)
        try:
            values[slot] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", no, key) from None
        lines[slot] = (no, key)
    return _build(values, lines, base_dir)


def parse_config(path) -> ExperimentConfig:
    """Read and validate a configuration file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_text(text, os.path.dirname(os.path.abspath(path)))


def _build(values: dict, lines: dict, base_dir: str) -> ExperimentConfig:
    def err(msg, slot=None, key=None):
        no, k = lines.get(slot, (None, key))
        return ConfigError(msg, no, k)

    def get(sec, name, default=None):
        return values.get((sec, name), default)

    if not any(s[0] == "potential" for s in values):
        raise ConfigError("missing required key: potential", key="potential")
    for sec, name in (("potential", "family"), ("grid", "half_width"), ("grid", "n_points"), ("drive", "period")):
        if (sec, name) not in values:
            raise ConfigError(f"missing required key: {sec}.{name}", key=f"{sec}.{name}")

    family = get("potential", "family")
    pfile = get("potential", "file")
    if family == "sampled":
        if pfile is None:
            raise err("potential.file is required for the sampled family", ("potential", "family"))
        pfile = pfile if os.path.isabs(pfile) else os.path.normpath(os.path.join(base_dir, pfile))
        if not os.path.isfile(pfile):
            raise err(f"potential.file: no such file {pfile}", ("potential", "file"), "potential.file")
    elif pfile is not None:
        raise err("potential.file is only used by the sampled family", ("potential", "file"), "potential.file")
    pot = PotentialSpec(family, get("potential", "depth", 2.0), get("potential", "width", 1.0), pfile,
                        get("potential", "state_index", 0))

    labels = sorted({s[1] for s in values if s[0] == "harmonic"})
    harmonics = tuple(HarmonicSpec(lb, **{s[2]: v for s, v in values.items() if s[0] == "harmonic" and s[1] == lb})
                      for lb in labels)

    grid = GridSpec(get("grid", "half_width"), get("grid", "n_points"))
    num = NumericsSpec(**{s[1]: (tuple(v) if s[1] == "epsilon_ladder" else v)
                          for s, v in values.items() if s[0] == "numerics"})
    cfg = ExperimentConfig(pot, grid, get("drive", "period"), harmonics, tuple(get("drive", "alphas", ())),
                           num, get("output", "directory", "results"))

    # ranges
    def positive(slot, v):
        if not v > 0:
            raise err(f"{slot[0]}.{slot[1]} must be positive, got {v}", slot, f"{slot[0]}.{slot[1]}")

    positive(("potential", "width"), pot.width)
    if pot.depth < 0:
        raise err(f"potential.depth must be >= 0, got {pot.depth}", ("potential", "depth"), "potential.depth")
    if pot.state_index < 0:
        raise err("potential.state_index must be >= 0", ("potential", "state_index"), "potential.state_index")
    positive(("grid", "half_width"), grid.half_width)
    if grid.n_points < 3:
        raise err("grid.n_points must be >= 3", ("grid", "n_points"), "grid.n_points")
    positive(("drive", "period"), cfg.period)
    for hs in harmonics:
        if hs.m < 0:
            slot = ("harmonic", hs.label, "m")
            raise err(f"perturbation.harmonic.{hs.label}.m must be >= 0", slot, f"perturbation.harmonic.{hs.label}.m")
        if not hs.width > 0:
            slot = ("harmonic", hs.label, "width")
            raise err(f"perturbation.harmonic.{hs.label}.width must be positive", slot,
                      f"perturbation.harmonic.{hs.label}.width")
    scale = sum(abs(hs.coefficient) for hs in harmonics)
    for a in cfg.alphas:
        if abs(a) * scale >= ALPHA_BOUND:
            raise err(f"drive.alphas: alpha = {a} violates the perturbative bound "
                      f"|alpha| * sum|coefficient| < {ALPHA_BOUND} (here {abs(a) * scale:.3g})",
                      ("drive", "alphas"), "drive.alphas")
    if num.n_max < 1:
        raise err("numerics.n_max must be >= 1", ("numerics", "n_max"), "numerics.n_max")
    if len(num.epsilon_ladder) < 2 or any(e <= 0 for e in num.epsilon_ladder):
        raise err("numerics.epsilon_ladder needs >= 2 positive values", ("numerics", "epsilon_ladder"),
                  "numerics.epsilon_ladder")
    for name in ("delta_thr", "threshold_margin", "prop_h", "decay_product"):
        positive(("numerics", name), getattr(num, name))
    if num.steps_per_period < 1:
        raise err("numerics.steps_per_period must be >= 1", ("numerics", "steps_per_period"),
                  "numerics.steps_per_period")
    if num.launches is not None and (num.launches < 1 or num.steps_per_period % num.launches):
        raise err("numerics.launches must divide numerics.steps_per_period", ("numerics", "launches"),
                  "numerics.launches")
    if num.s_max is not None:
        periods = num.s_max / cfg.period
        if periods < 1 or abs(periods - round(periods)) > 1e-9 * periods:
            raise err("numerics.s_max must be a positive multiple of drive.period", ("numerics", "s_max"),
                      "numerics.s_max")
    if num.seed < 0 or num.seed >= 2 ** 64:
        raise err("numerics.seed must be an unsigned 64-bit integer", ("numerics", "seed"), "numerics.seed")
    if num.trials < 1:
        raise err("numerics.trials must be >= 1", ("numerics", "trials"), "numerics.trials")
    return cfg


# ---------------------------------------------------------------------------
# rendering

def _fmt(v) -> str:
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    if v is None:
        return "auto"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_config(cfg: ExperimentConfig, include_output: bool = True) -> str:
    """Canonical text form (fixed key order, floats in round-trip precision)."""
    out = []
    p = cfg.potential
    out.append(f"potential.family = {p.family}")
    out += [f"potential.depth = {_fmt(p.depth)}", f"potential.width = {_fmt(p.width)}"]
    if p.file is not None:
        out.append(f"potential.file = {p.file}")
    out.append(f"potential.state_index = {p.state_index}")
    for hs in cfg.harmonics:
        for name in ("m", "profile", "center", "width", "coefficient", "kind"):
            out.append(f"perturbation.harmonic.{hs.label}.{name} = {_fmt(getattr(hs, name))}")
    out.append(f"drive.period = {_fmt(cfg.period)}")
    if cfg.alphas:
        out.append(f"drive.alphas = {_fmt(cfg.alphas)}")
    out += [f"grid.half_width = {_fmt(cfg.grid.half_width)}", f"grid.n_points = {cfg.grid.n_points}"]
    for name in NumericsSpec.__dataclass_fields__:
        out.append(f"numerics.{name} = {_fmt(getattr(cfg.numerics, name))}")
    if include_output:
        out.append(f"output.directory = {cfg.output_directory}")
    return "\n".join(out) + "\n"


def config_digest(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical text, excluding the output directory."""
    return hashlib.sha256(render_config(cfg, include_output=False).encode("utf-8")).hexdigest()
