"""Run configuration: JSON parsing with strict key checking and validation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EllipticityViolation, ParseError, ValidationError
from .grid import SpaceTimeGrid
from .macdonald import QuadratureSpec
from .reduction import PotentialSpec
from .symbol import LameParams

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class LameConfig:
    mu: float
    lam: float
    delta0: float = 1e-3


@dataclass(frozen=True)
class GridConfig:
    n: int = 2
    dims: tuple[int, ...] = (8, 8)
    nt: int = 8
    lengths: tuple[float, ...] = (TWO_PI, TWO_PI)
    period_t: float = TWO_PI


@dataclass(frozen=True)
class PotentialConfig:
    amps: tuple[float, ...] = (0.6, 0.3)
    wavevectors: tuple[tuple[float, ...], ...] = ((1.0, 0.0), (0.0, 1.0))
    omegas: tuple[float, ...] = (0.0, 1.0)
    phases: tuple[float, ...] = (0.2, 1.1)
    offset: float = 0.25


@dataclass(frozen=True)
class LadderConfig:
    levels: int = 21
    ratio: float = 0.5
    fit_from: int = 6

    def values(self) -> np.ndarray:
        return self.ratio ** np.arange(self.levels)


@dataclass(frozen=True)
class ModeConfig:
    """Probe mode ``v exp(i(k.x + sigma t))`` for single-mode checks."""
    k: tuple[float, ...] = (1.0, 2.0)
    sigma: float = 1.0
    amplitude: tuple[tuple[float, float], ...] = ((0.3, 0.1), (-0.7, 0.0))

    def vector(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.amplitude])


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-15
    max_subdivisions: int = 400


@dataclass(frozen=True)
class RunConfig:
    lame: LameConfig
    s_values: tuple[float, ...]
    grid: GridConfig = field(default_factory=GridConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    y_ladder: LadderConfig = field(default_factory=LadderConfig)
    mode: ModeConfig = field(default_factory=ModeConfig)
    quadrature: QuadConfig = field(default_factory=QuadConfig)
    rng_seed: int = 20240601
    output_dir: str = "lamefrac_out"

    # derived objects -------------------------------------------------------
    def params(self) -> LameParams:
        return LameParams(self.lame.mu, self.lame.lam, self.lame.delta0)

    def space_time_grid(self) -> SpaceTimeGrid:
        g = self.grid
        return SpaceTimeGrid(g.n, tuple(g.dims), g.nt, tuple(g.lengths), g.period_t)

    def potential_spec(self) -> PotentialSpec:
        p = self.potential
        return PotentialSpec(self.grid.n, tuple(p.amps), tuple(map(tuple, p.wavevectors)),
                             tuple(p.omegas), tuple(p.phases), p.offset)

    def quad(self) -> QuadratureSpec:
        q = self.quadrature
        return QuadratureSpec(q.rel_tol, q.abs_tol, q.max_subdivisions)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lame"]["lambda"] = d["lame"].pop("lam")
        return d


_SECTIONS = {
    "lame": (LameConfig, {"mu", "lambda", "delta0"}),
    "grid": (GridConfig, {"n", "dims", "nt", "lengths", "period_t"}),
    "potential": (PotentialConfig, {"amps", "wavevectors", "omegas", "phases", "offset"}),
    "y_ladder": (LadderConfig, {"levels", "ratio", "fit_from"}),
    "mode": (ModeConfig, {"k", "sigma", "amplitude"}),
    "quadrature": (QuadConfig, {"rel_tol", "abs_tol", "max_subdivisions"}),
}
_TOP = set(_SECTIONS) | {"s_values", "rng_seed", "output_dir"}


def _tuplify(v):
    if isinstance(v, list):
        return tuple(_tuplify(x) for x in v)
    return v


def _section(name: str, raw) -> object:
    cls, keys = _SECTIONS[name]
    if not isinstance(raw, dict):
        raise ParseError(f"section '{name}' must be an object")
    unknown = set(raw) - keys
    if unknown:
        raise ParseError(f"unknown key '{name}.{sorted(unknown)[0]}'")
    kwargs = {("lam" if k == "lambda" else k): _tuplify(v) for k, v in raw.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ParseError(f"section '{name}': {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Only ``lame.mu``, ``lame.lambda`` and ``s_values`` are required.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(raw) - _TOP
    if unknown:
        raise ParseError(f"unknown key '{sorted(unknown)[0]}'")
    if "lame" not in raw or not {"mu", "lambda"} <= set(raw.get("lame") or {}):
        raise ParseError("missing required key 'lame.mu' / 'lame.lambda'")
    if "s_values" not in raw:
        raise ParseError("missing required key 's_values'")
    kwargs = {name: _section(name, raw[name]) for name in _SECTIONS if name in raw}
    s_values = raw["s_values"]
    if isinstance(s_values, (int, float)):
        s_values = [s_values]
    kwargs["s_values"] = _tuplify(s_values)
    for key in ("rng_seed", "output_dir"):
        if key in raw:
            kwargs[key] = raw[key]
    cfg = RunConfig(**kwargs)
    validate_config(cfg)
    return cfg


def default_config() -> RunConfig:
    return RunConfig(lame=LameConfig(1.0, 0.5), s_values=(0.3, 0.5, 0.75))


def _num(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def validate_config(cfg: RunConfig) -> None:
    """Check every module precondition before any computation runs."""
    mu = _num("lame.mu", cfg.lame.mu)
    lam = _num("lame.lambda", cfg.lame.lam)
    d0 = _num("lame.delta0", cfg.lame.delta0)
    try:
        LameParams(mu, lam, d0)
    except EllipticityViolation as exc:
        raise ValidationError(f"ellipticity condition (mu >= delta0, 2 mu + lambda >= delta0): "
                              f"{exc}") from None
    if not cfg.s_values:
        raise ValidationError("s_values must not be empty")
    for s in cfg.s_values:
        if not 0 < _num("s_values[]", s) < 1:
            raise ValidationError(f"s = {s} outside the open interval (0, 1)")
    g = cfg.grid
    if not (isinstance(g.n, int) and 1 <= g.n <= 3):
        raise ValidationError("grid.n must be 1, 2 or 3")
    if len(g.dims) != g.n or len(g.lengths) != g.n:
        raise ValidationError("grid.dims and grid.lengths need n entries")
    for c in tuple(g.dims) + (g.nt,):
        if not isinstance(c, int) or c < 4 or c % 2:
            raise ValidationError(f"grid sample counts must be even integers >= 4, got {c}")
    if min(g.lengths) <= 0 or g.period_t <= 0:
        raise ValidationError("grid periods must be positive")
    p = cfg.potential
    if not len(p.amps) == len(p.wavevectors) == len(p.omegas) == len(p.phases):
        raise ValidationError("potential term lists must have equal length")
    if any(len(k) != g.n for k in p.wavevectors):
        raise ValidationError("potential wavevectors must have grid.n entries")
    lad = cfg.y_ladder
    if not (isinstance(lad.levels, int) and lad.levels >= 4 and 0 < lad.ratio < 1):
        raise ValidationError("y_ladder needs levels >= 4 and 0 < ratio < 1")
    if not 0 <= lad.fit_from <= lad.levels - 3:
        raise ValidationError("y_ladder.fit_from leaves fewer than 3 levels to fit")
    m = cfg.mode
    if len(m.k) != g.n or len(m.amplitude) != g.n:
        raise ValidationError("mode.k and mode.amplitude need grid.n entries")
    if all(abs(complex(*a)) == 0 for a in m.amplitude):
        raise ValidationError("mode.amplitude must be nonzero")
    try:
        QuadratureSpec(cfg.quadrature.rel_tol, cfg.quadrature.abs_tol,
                       cfg.quadrature.max_subdivisions)
    except ValueError as exc:
        raise ValidationError(f"quadrature: {exc}") from None
    if not isinstance(cfg.rng_seed, int) or cfg.rng_seed < 0:
        raise ValidationError("rng_seed must be a non-negative integer")
