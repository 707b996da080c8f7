"""Periodic space-time lattices, unitary FFTs and multiplier pipelines.

Samples are stored as ``(components, x_1, ..., x_n, t)``.  Spectral
coefficients follow the convention ``f_hat(xi) = sum f(x) e^{-i x.xi}``
(numpy's forward FFT), normalised to be unitary, so a mode
``exp(i(k.x + sigma t))`` sits at frequency ``(k, sigma)`` and ``d/dt``
acts as multiplication by ``i sigma``.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidExponent, ShapeMismatch
from .symbol import LameParams


@dataclass(frozen=True)
class SpaceTimeGrid:
    n: int
    dims: tuple[int, ...]
    nt: int
    lengths: tuple[float, ...]
    period_t: float

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        lengths = tuple(float(x) for x in self.lengths)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= self.n <= 3:
            raise ValueError("spatial dimension must be 1, 2 or 3")
        if len(dims) != self.n or len(lengths) != self.n:
            raise ValueError("dims and lengths must have n entries")
        for c in dims + (self.nt,):
            if c < 4 or c % 2:
                raise ValueError("sample counts must be even and >= 4")
        if min(lengths) <= 0 or self.period_t <= 0:
            raise ValueError("periods must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims + (self.nt,)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list[np.ndarray]:
        xs = [np.arange(d) * (L / d) for d, L in zip(self.dims, self.lengths)]
        return xs + [np.arange(self.nt) * (self.period_t / self.nt)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def wavenumbers(self) -> list[np.ndarray]:
        """Angular frequencies per axis, spatial axes first, time last."""
        ks = [2 * np.pi * np.fft.fftfreq(d, d=L / d)
              for d, L in zip(self.dims, self.lengths)]
        return ks + [2 * np.pi * np.fft.fftfreq(self.nt, d=self.period_t / self.nt)]

    def frequency_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``xi`` with shape ``(n, *shape)`` and ``sigma`` with shape ``shape``."""
        grids = np.meshgrid(*self.wavenumbers(), indexing="ij")
        return np.stack(grids[:-1]), grids[-1]

    def nyquist_mask(self) -> np.ndarray:
        """True on every mode whose index on some axis equals ``N/2``."""
        masks = []
        for N in self.shape:
            m = np.zeros(N, dtype=bool)
            m[N // 2] = True
            masks.append(m)
        grids = np.meshgrid(*masks, indexing="ij")
        return np.logical_or.reduce(grids)


@dataclass(frozen=True)
class VectorField:
    grid: SpaceTimeGrid
    samples: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=float)
        if a.ndim != self.grid.n + 2 or a.shape[1:] != self.grid.shape:
            raise ShapeMismatch(f"samples of shape {a.shape} do not match grid {self.grid.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", a)

    @property
    def components(self) -> int:
        return self.samples.shape[0]

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.samples**2)))


@dataclass(frozen=True)
class SpectralField:
    grid: SpaceTimeGrid
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.modes, dtype=complex)
        if m.ndim != self.grid.n + 2 or m.shape[1:] != self.grid.shape:
            raise ShapeMismatch("spectral array does not match grid")
        object.__setattr__(self, "modes", m)

    @property
    def components(self) -> int:
        return self.modes.shape[0]

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.modes) ** 2)))


def _axes(grid: SpaceTimeGrid) -> tuple[int, ...]:
    return tuple(range(1, grid.n + 2))


def forward_transform(f: VectorField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.samples, axes=_axes(f.grid), norm="ortho"))


def inverse_complex(g: SpectralField) -> np.ndarray:
    return np.fft.ifftn(g.modes, axes=_axes(g.grid), norm="ortho")


def imaginary_residue(g: SpectralField) -> float:
    """Largest imaginary part produced by inverting ``g``."""
    return float(np.abs(inverse_complex(g).imag).max())


def inverse_transform(g: SpectralField) -> VectorField:
    return VectorField(g.grid, inverse_complex(g).real)


def nyquist_clear(g: SpectralField) -> SpectralField:
    modes = g.modes.copy()
    modes[:, g.grid.nyquist_mask()] = 0
    return SpectralField(g.grid, modes)


def band_limited_random(grid: SpaceTimeGrid, components: int, rng: np.random.Generator,
                        kmax: int = 3, mmax: int = 3) -> VectorField:
    """Random real field whose spectrum is confined to ``|k_j| <= kmax, |m| <= mmax``."""
    shape = (components,) + grid.shape
    white = rng.normal(size=shape)
    g = forward_transform(VectorField(grid, white)).modes
    keep = np.ones(grid.shape, dtype=bool)
    idx = np.meshgrid(*[np.fft.fftfreq(N, d=1.0 / N) for N in grid.shape], indexing="ij")
    for j, ix in enumerate(idx):
        cap = kmax if j < grid.n else mmax
        keep &= np.abs(ix) <= cap
    g[:, ~keep] = 0
    return inverse_transform(SpectralField(grid, g))


# -- multipliers -----------------------------------------------------------

def _eigenvalue_mesh(p: LameParams, grid: SpaceTimeGrid):
    xi, sigma = grid.frequency_mesh()
    xi2 = np.sum(xi**2, axis=0)
    return xi, xi2, p.c1 * xi2 + 1j * sigma, p.c2 * xi2 + 1j * sigma


def _project(xi: np.ndarray, xi2: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``P(xi) v`` per mode, with ``P(0) = 0``."""
    dot = np.sum(xi * v, axis=0)
    safe = np.where(xi2 > 0, xi2, 1.0)
    return np.where(xi2 > 0, xi * dot / safe, 0.0)


def apply_split_multiplier(g: SpectralField, xi, xi2, c_perp, c_par) -> SpectralField:
    """Multiply each mode by ``c_perp I + (c_par - c_perp) P(xi)``."""
    v = g.modes
    if v.shape[0] != xi.shape[0]:
        raise ShapeMismatch("multiplier needs an n-component field")
    pv = _project(xi, xi2, v)
    return SpectralField(g.grid, c_perp * v + (c_par - c_perp) * pv)


def _power(z: np.ndarray, s: float) -> np.ndarray:
    out = np.zeros_like(z)
    nz = z != 0
    out[nz] = z[nz] ** s
    return out


def hs_spectrum(p: LameParams, f: VectorField, s: float) -> SpectralField:
    if not 0 < s <= 1:
        raise InvalidExponent(f"exponent s = {s} outside (0, 1]")
    if f.components != f.grid.n:
        raise ShapeMismatch("H^s acts on n-component fields")
    g = nyquist_clear(forward_transform(f))
    xi, xi2, l1, l2 = _eigenvalue_mesh(p, f.grid)
    return apply_split_multiplier(g, xi, xi2, _power(l1, s), _power(l2, s))


def apply_Hs(p: LameParams, f: VectorField, s: float) -> VectorField:
    return inverse_transform(hs_spectrum(p, f, s))


def evolutive_spectrum(p: LameParams, f: VectorField, tau: float) -> SpectralField:
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if f.components != f.grid.n:
        raise ShapeMismatch("evolutive semigroup acts on n-component fields")
    g = nyquist_clear(forward_transform(f))
    xi, xi2, l1, l2 = _eigenvalue_mesh(p, f.grid)
    return apply_split_multiplier(g, xi, xi2, np.exp(-tau * l1), np.exp(-tau * l2))


def apply_evolutive(p: LameParams, f: VectorField, tau: float) -> VectorField:
    return inverse_transform(evolutive_spectrum(p, f, tau))


# -- spectral differentiation ---------------------------------------------

def _spec(f: VectorField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    g = nyquist_clear(forward_transform(f)).modes
    xi, sigma = f.grid.frequency_mesh()
    return g, xi, sigma


def divergence(f: VectorField) -> VectorField:
    if f.components != f.grid.n:
        raise ShapeMismatch("divergence needs an n-component field")
    g, xi, _ = _spec(f)
    d = np.sum(1j * xi * g, axis=0, keepdims=True)
    return inverse_transform(SpectralField(f.grid, d))


def gradient(f: VectorField) -> VectorField:
    if f.components != 1:
        raise ShapeMismatch("gradient needs a scalar field")
    g, xi, _ = _spec(f)
    return inverse_transform(SpectralField(f.grid, 1j * xi * g[0]))


def laplacian(f: VectorField) -> VectorField:
    g, xi, _ = _spec(f)
    return inverse_transform(SpectralField(f.grid, -np.sum(xi**2, axis=0) * g))


def time_derivative(f: VectorField) -> VectorField:
    g, _, sigma = _spec(f)
    return inverse_transform(SpectralField(f.grid, 1j * sigma * g))


def lame_operator(p: LameParams, f: VectorField) -> VectorField:
    """``mu Lap u + (mu + lambda) grad div u``."""
    lap = laplacian(f).samples
    graddiv = gradient(divergence(f)).samples
    return VectorField(f.grid, p.mu * lap + (p.mu + p.lam) * graddiv)


def sobolev_norm(f: VectorField | SpectralField, s: float) -> float:
    """Discrete norm with per-mode weight ``(1 + |xi|^4 + sigma^2)^s``.

    Negative ``s`` gives the dual norm used for the Neumann trace.
    """
    if not -1 < s < 1:
        raise InvalidExponent("sobolev_norm needs |s| < 1")
    g = f if isinstance(f, SpectralField) else forward_transform(f)
    xi, sigma = g.grid.frequency_mesh()
    w = (1 + np.sum(xi**2, axis=0) ** 2 + sigma**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(g.modes) ** 2)))


# -- field I/O ---------------------------------------------------------------

_MAGIC = b"LFLD1\n"


def _header(f: VectorField) -> dict:
    g = f.grid
    return {"n": g.n, "dims": list(g.dims), "nt": g.nt, "lengths": list(g.lengths),
            "period_t": g.period_t, "components": f.components}


def _grid_from_header(h: dict) -> SpaceTimeGrid:
    return SpaceTimeGrid(int(h["n"]), tuple(h["dims"]), int(h["nt"]),
                         tuple(h["lengths"]), float(h["period_t"]))


def write_field(path: str | Path, f: VectorField) -> None:
    """Binary (``.lfld``) or CSV (``.csv``) export; both round-trip bit-exactly.

    Binary layout: magic line, 4-byte little-endian header length, JSON
    header, then float64 little-endian samples in row-major order.  The CSV
    layout is one ``key,value...`` header line per field followed by one
    sample per line, written with ``repr`` so every double survives.
    """
    path = Path(path)
    h = _header(f)
    flat = np.ascontiguousarray(f.samples).ravel()
    if path.suffix == ".csv":
        lines = [f"{k}," + ",".join(repr(x) for x in (v if isinstance(v, list) else [v]))
                 for k, v in h.items()]
        lines.append("samples")
        lines.extend(repr(float(x)) for x in flat)
        path.write_text("\n".join(lines) + "\n")
        return
    hb = json.dumps(h).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(flat.astype("<f8").tobytes())


def read_field(path: str | Path) -> VectorField:
    path = Path(path)
    if path.suffix == ".csv":
        lines = path.read_text().splitlines()
        h = {}
        i = 0
        while lines[i] != "samples":
            key, *vals = lines[i].split(",")
            h[key] = [float(v) for v in vals]
            i += 1
        for k in ("n", "nt", "components"):
            h[k] = int(h[k][0])
        h["dims"] = [int(d) for d in h["dims"]]
        h["period_t"] = h["period_t"][0]
        data = np.array([float(x) for x in lines[i + 1:]])
    else:
        raw = path.read_bytes()
        if not raw.startswith(_MAGIC):
            raise ShapeMismatch(f"{path} is not a field file")
        off = len(_MAGIC)
        (hl,) = struct.unpack("<I", raw[off:off + 4])
        h = json.loads(raw[off + 4: off + 4 + hl])
        data = np.frombuffer(raw[off + 4 + hl:], dtype="<f8").astype(float)
    grid = _grid_from_header(h)
    shape = (h["components"],) + grid.shape
    if data.size != int(np.prod(shape)):
        raise ShapeMismatch("sample count does not match header")
    return VectorField(grid, data.reshape(shape))
