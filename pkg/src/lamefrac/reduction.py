r"""Reduction of the Lame extension system and the exponential W-transform.

Pipeline for a single Fourier mode ``u = v exp(i(k.x + sigma t))``:

1. ``U = (u~, div u~)`` from the closed-form extension;
2. ``U*``: the first ``n`` components read at ``sqrt(mu) x``, the last one at
   ``sqrt(2 mu + lambda) x`` so that every component carries a unit
   diffusion coefficient;
3. drift ``B grad U*`` and bulk residual
   ``y^a d_t U* - div(y^a grad U*) - y^a B grad U*``.

The potential matrix is ``V~ = V I + N`` where ``N`` carries ``grad_x V`` in
the first ``n`` slots of its last row, so ``N^2 = 0`` and all such matrices
commute.  ``W = exp(-V~ y^(2s) / (2s)) U*`` where ``2s = 1 - a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionViolation, ShapeMismatch
from .extension import ExtensionProfile, fit_loglog_slope
from .modal import FieldValues, MacdonaldProfile, ModalField, SeriesProfile, Term
from .symbol import LameParams, projector

STRUCTURES = ("row", "column", "arrow")


# -- potential -------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSpec:
    """``V(x, t) = offset + sum_j amp_j cos(k_j . x + omega_j t + phase_j)``."""
    n: int
    amps: tuple[float, ...] = ()
    wavevectors: tuple[tuple[float, ...], ...] = ()
    omegas: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        m = len(self.amps)
        if not (len(self.wavevectors) == len(self.omegas) == len(self.phases) == m):
            raise ShapeMismatch("potential term lists differ in length")
        if any(len(k) != self.n for k in self.wavevectors):
            raise ShapeMismatch("wavevectors must have length n")

    @classmethod
    def zero(cls, n: int) -> "PotentialSpec":
        return cls(n)

    @property
    def _K(self) -> np.ndarray:
        return np.array(self.wavevectors, dtype=float).reshape(len(self.amps), self.n)

    @property
    def c3_bound(self) -> float:
        """Bound on every partial derivative of order at most three."""
        K = self._K
        om = np.asarray(self.omegas, dtype=float)
        top = np.maximum(1.0, np.maximum(np.abs(K).max(axis=1, initial=0.0), np.abs(om)))
        return abs(self.offset) + float(np.sum(np.abs(self.amps) * top**3))

    def exponential_modes(self) -> list[tuple[complex, np.ndarray, float]]:
        """``V`` as ``sum c e^{i(k.x + w t)}`` (real offset as the zero mode)."""
        modes = []
        if self.offset:
            modes.append((complex(self.offset), np.zeros(self.n), 0.0))
        for A, k, w, ph in zip(self.amps, self._K, self.omegas, self.phases):
            modes.append((0.5 * A * np.exp(1j * ph), k, float(w)))
            modes.append((0.5 * A * np.exp(-1j * ph), -k, -float(w)))
        return modes

    def derivatives(self, x: np.ndarray, t: np.ndarray) -> dict[str, np.ndarray]:
        """``V`` and its partials at points ``x (N, n)``, ``t (N,)``.

        Keys: ``V``, ``Vt`` (N,), ``Vx`` (n, N), ``Vxx`` (n, n, N) with
        ``Vxx[i, j] = d_i d_j V``, ``Vxt`` (n, N), ``Vxxx`` (n, n, N) with
        ``Vxxx[i, j] = d_i d_j d_j V``.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.asarray(t, dtype=float)
        N = x.shape[0]
        n = self.n
        out = {"V": np.full(N, float(self.offset)), "Vt": np.zeros(N),
               "Vx": np.zeros((n, N)), "Vxx": np.zeros((n, n, N)),
               "Vxt": np.zeros((n, N)), "Vxxx": np.zeros((n, n, N))}
        for A, k, w, ph in zip(self.amps, self._K, self.omegas, self.phases):
            th = x @ k + w * t + ph
            c, sn = A * np.cos(th), A * np.sin(th)
            out["V"] += c
            out["Vt"] += -w * sn
            out["Vx"] += -k[:, None] * sn
            out["Vxx"] += -(k[:, None, None] * k[None, :, None]) * c
            out["Vxt"] += -w * k[:, None] * c
            out["Vxxx"] += (k[:, None, None] * (k**2)[None, :, None]) * sn
        return out


def _nilpotent(grad: np.ndarray, structure: str) -> np.ndarray:
    """``(N, n+1, n+1)`` matrices carrying ``grad`` (shape ``(n, N)``)."""
    n, N = grad.shape
    out = np.zeros((N, n + 1, n + 1))
    if structure in ("row", "arrow"):
        out[:, n, :n] = grad.T
    if structure in ("column", "arrow"):
        out[:, :n, n] = grad.T
    if structure not in STRUCTURES:
        raise ValueError(f"unknown structure {structure!r}")
    return out


def potential_matrix(V: PotentialSpec, x, t, structure: str = "row") -> np.ndarray:
    """Stack of ``V~ = V I + N`` at the given points, shape ``(N, n+1, n+1)``.

    ``structure="row"`` is the reduction's matrix.  ``"column"`` (its
    transpose) and ``"arrow"`` (both) exist as controls for the commutation
    test.
    """
    d = V.derivatives(x, t)
    eye = np.eye(V.n + 1)
    return d["V"][:, None, None] * eye + _nilpotent(d["Vx"], structure)


def potential_derivative_matrices(V: PotentialSpec, x, t, structure: str = "row"):
    """``d_t V~`` and ``d_i V~`` as a list of ``(N, n+1, n+1)`` stacks."""
    d = V.derivatives(x, t)
    eye = np.eye(V.n + 1)
    mats = [d["Vt"][:, None, None] * eye + _nilpotent(d["Vxt"], structure)]
    for i in range(V.n):
        mats.append(d["Vx"][i][:, None, None] * eye + _nilpotent(d["Vxx"][i], structure))
    return mats


def commutator_check(V: PotentialSpec, x, t, structure: str = "row") -> float:
    """Largest entry of ``[V~, D]`` over samples and ``D in {d_t V~, d_i V~}``."""
    M = potential_matrix(V, x, t, structure)
    worst = 0.0
    for D in potential_derivative_matrices(V, x, t, structure):
        worst = max(worst, float(np.abs(M @ D - D @ M).max()))
    return worst


def split_potential(Vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(V, N)`` from a stack of row-structured potential matrices."""
    v = Vt[..., -1, -1]
    N = Vt - v[..., None, None] * np.eye(Vt.shape[-1])
    return v, N


def exp_potential(c, Vt: np.ndarray) -> np.ndarray:
    """``exp(c V~) = e^{cV} (I + c N)``; valid because ``N^2 = 0``."""
    v, N = split_potential(np.asarray(Vt, dtype=float))
    c = np.asarray(c, dtype=float)
    eye = np.eye(Vt.shape[-1])
    cc = c[..., None, None] if c.ndim else c
    return np.exp(c * v)[..., None, None] * (eye + cc * N)


def exp_series(c: float, Vt: np.ndarray, terms: int = 20) -> np.ndarray:
    """Truncated Taylor series of ``exp(c V~)``; an oracle for :func:`exp_potential`.

    The argument is halved until its infinity norm is at most 1/2, the
    ``terms``-term series is summed, and the result squared back.
    """
    Vt = np.asarray(Vt, dtype=float)
    X = c * Vt
    norm = float(np.abs(X).sum(axis=-1).max()) if X.size else 0.0
    halvings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    X = X / 2.0**halvings
    acc = np.broadcast_to(np.eye(Vt.shape[-1]), Vt.shape).copy()
    term = acc.copy()
    for k in range(1, terms):
        term = term @ X / k
        acc = acc + term
    for _ in range(halvings):
        acc = acc @ acc
    return acc


# -- single-mode fields ------------------------------------------------------------

def modal_extension(p: LameParams, k, sigma: float, v, s: float) -> ModalField:
    """Closed-form extension of ``v exp(i(k.x + sigma t))`` as a modal field."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    n = k.size
    if v.size != n:
        raise ShapeMismatch("amplitude and wavevector differ in length")
    xi2 = float(k @ k)
    P = projector(k)
    par = P @ v
    perp = v - par
    prof1 = MacdonaldProfile(complex(p.c1 * xi2, sigma), s)
    prof2 = MacdonaldProfile(complex(p.c2 * xi2, sigma), s)
    terms = []
    for j in range(n):
        if perp[j] != 0:
            terms.append(Term(j, k, sigma, prof1, complex(perp[j])))
        if par[j] != 0:
            terms.append(Term(j, k, sigma, prof2, complex(par[j])))
    return ModalField(n, n, tuple(terms))


def assemble_U(u: ModalField) -> ModalField:
    """Append ``div u~`` as the last component."""
    n = u.n
    if u.components != n:
        raise ShapeMismatch("assemble_U expects an n-component extension")
    extra = [Term(n, t.q, t.sigma, t.profile, 1j * t.q[t.comp] * t.coef)
             for t in u.terms if t.q[t.comp] != 0]
    return ModalField(n, n + 1, u.terms + tuple(extra))


def assemble_U_grid(prof: ExtensionProfile) -> np.ndarray:
    """Spectra of ``(u~, div u~)`` on the ladder, shape ``(levels, n+1, *grid)``."""
    xi, _ = prof.grid.frequency_mesh()
    div = np.sum(1j * xi[None] * prof.values, axis=1, keepdims=True)
    return np.concatenate([prof.values, div], axis=1)


def _rescale(U: ModalField, first: float, last: float) -> ModalField:
    n = U.n
    terms = tuple(Term(t.comp, t.q * (last if t.comp == n else first), t.sigma,
                       t.profile, t.coef) for t in U.terms)
    return ModalField(n, U.components, terms)


def anisotropic_scale(U: ModalField, p: LameParams) -> ModalField:
    """``U*``: components ``1..n`` at ``sqrt(mu) x``, the last at ``sqrt(2mu+lambda) x``.

    For a mode ``exp(i q.x)`` evaluation at ``c x`` is the mode ``exp(i c q.x)``.
    """
    return _rescale(U, math.sqrt(p.c1), math.sqrt(p.c2))


def drift_coefficient(p: LameParams) -> float:
    return (p.mu + p.lam) / math.sqrt(p.mu)


def drift_apply(p: LameParams, grad_last: np.ndarray) -> np.ndarray:
    """``B grad U*``: ``(mu+lambda)/sqrt(mu) d_i (U*)^{n+1}`` for ``i <= n``, then 0.

    ``grad_last`` has shape ``(n, N)``; the result has shape ``(n+1, N)``.
    """
    grad_last = np.asarray(grad_last)
    n = grad_last.shape[0]
    out = np.zeros((n + 1,) + grad_last.shape[1:], dtype=grad_last.dtype)
    out[:n] = drift_coefficient(p) * grad_last
    return out


@dataclass(frozen=True)
class ReducedMode:
    """``U*`` for one boundary mode, plus ``div u~`` read at ``sqrt(mu) x``.

    The second field feeds the drift variant that keeps the divergence at the
    same spatial scaling as the first block.
    """
    ustar: ModalField
    div_at_shear_scale: ModalField


def single_mode_reduced(p: LameParams, k, sigma: float, v, s: float) -> ReducedMode:
    U = assemble_U(modal_extension(p, k, sigma, v, s))
    n = U.n
    ustar = anisotropic_scale(U, p)
    last = [t for t in U.terms if t.comp == n]
    r = math.sqrt(p.c1)
    div = ModalField(n, 1, tuple(Term(0, t.q * r, t.sigma, t.profile, t.coef) for t in last))
    return ReducedMode(ustar, div)


def bulk_operator(fv: FieldValues, y: np.ndarray, s: float) -> np.ndarray:
    """``y^a d_t F - div_{x,y}(y^a grad F)``, shape ``(C, N)``."""
    a = 1 - 2 * s
    ya = y**a
    return ya * (fv.dt - fv.dyy - (a / y) * fv.dy - fv.lap)


def _field_scale(fv: FieldValues, y: np.ndarray, s: float) -> np.ndarray:
    a = 1 - 2 * s
    grad_norm = np.sqrt(np.sum(np.abs(fv.grad) ** 2, axis=(0, 1)) + np.sum(np.abs(fv.dy) ** 2, 0))
    return y**a * (np.sqrt(np.sum(np.abs(fv.val) ** 2, 0)) + grad_norm)


def staru_residual(p: LameParams, s: float, k, sigma: float, v, x, t, y,
                   drift: str = "literal") -> float:
    """Relative bulk residual of the reduced system for one boundary mode.

    ``drift="literal"`` differentiates ``(U*)^{n+1}`` itself;
    ``drift="consistent"`` differentiates ``div u~`` read at ``sqrt(mu) x``;
    ``drift="none"`` omits the drift.
    Returns ``max |res| / max y^a (|U*| + |grad U*|)`` (0 for a zero mode).
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("residual samples need y > 0")
    red = single_mode_reduced(p, k, sigma, v, s)
    fv = red.ustar.evaluate(x, t, y)
    res = bulk_operator(fv, y, s)
    n = red.ustar.n
    ya = y ** (1 - 2 * s)
    if drift == "literal":
        res = res - ya * drift_apply(p, fv.grad[n])
    elif drift == "consistent":
        dv = red.div_at_shear_scale.evaluate(x, t, y)
        res = res - ya * drift_apply(p, dv.grad[0])
    elif drift != "none":
        raise ValueError(f"unknown drift variant {drift!r}")
    scale = float(_field_scale(fv, y, s).max())
    if scale == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(res) ** 2, 0)).max() / scale)


def scalar_extension_residual(s: float, L2: complex, y) -> float:
    """Relative residual of ``F'' + (a/y) F' = L^2 F`` for the Macdonald profile."""
    y = np.asarray(y, dtype=float)
    pv = MacdonaldProfile(complex(L2), s)(y)
    a = 1 - 2 * s
    res = np.abs(pv.fyy + a / y * pv.fy - L2 * pv.f)
    scale = np.abs(pv.fyy) + np.abs(a / y * pv.fy) + abs(L2) * np.abs(pv.f)
    return float((res / scale).max())


# -- Neumann-coupled reduced fields ----------------------------------------------

def _potential_matrix_modes(V: PotentialSpec):
    """Modes of ``V~`` as ``(coef, q, w, matrix)`` with a constant matrix factor."""
    n = V.n
    out = []
    for c, q, w in V.exponential_modes():
        M = np.eye(n + 1, dtype=complex)
        M[n, :n] = 1j * q
        out.append((c, q, w, M))
    return out


def neumann_coupled_field(p: LameParams, V: PotentialSpec, s: float, q, sigma: float,
                          g) -> ModalField:
    """Reduced field with trace ``g e^{i(q.x+sigma t)}`` and ``y^a d_y U* -> V~ U*``.

    Solves ``y^a d_t U* - div(y^a grad U*) = y^a B grad U*`` exactly: each
    mode of the trace gets the even series profile, each mode of
    ``h = V~ g`` the odd one, and the drift forcing on components ``1..n`` is
    absorbed by the ``L^2``-derivative of the last component's profiles (all
    components share ``L^2 = |q|^2 + i sigma`` after the rescaling).
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    g = np.atleast_1d(np.asarray(g, dtype=complex))
    n = V.n
    if q.size != n or g.size != n + 1:
        raise ShapeMismatch("trace needs n+1 amplitudes and an n-vector frequency")
    coupling = drift_coefficient(p)
    terms: list[Term] = []

    def add(freq, om, amp, kind):
        L2 = complex(freq @ freq, om)
        base = SeriesProfile(L2, s, kind)
        for j in range(n + 1):
            if amp[j] != 0:
                terms.append(Term(j, freq, om, base, complex(amp[j])))
        if amp[n] != 0 and coupling != 0:
            dprof = SeriesProfile(L2, s, kind, dL2=True)
            for i in range(n):
                if freq[i] != 0:
                    terms.append(Term(i, freq, om, dprof, complex(-coupling * 1j * freq[i] * amp[n])))

    add(q, sigma, g, "even")
    for c, kq, w, M in _potential_matrix_modes(V):
        add(q + kq, sigma + w, c * (M @ g), "odd")
    return ModalField(n, n + 1, tuple(terms))


# -- W-transform ---------------------------------------------------------------------

@dataclass(frozen=True)
class WValues:
    W: np.ndarray        # (C, N)
    Wt: np.ndarray
    Wgrad: np.ndarray    # (C, n, N)
    Wlap: np.ndarray
    Wy: np.ndarray
    Wyy: np.ndarray
    ya_Wy: np.ndarray


def _matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    # M: (N, C, C), v: (C, N) -> (C, N)
    return np.einsum("nij,jn->in", M, v)


def w_transform(Ustar: ModalField, V: PotentialSpec, s: float, x, t, y) -> WValues:
    """``W = E U*`` with ``E = exp(c V~)``, ``c = -y^(2s)/(2s)``, and its derivatives.

    ``E = e^{cV}(I + cN)`` is differentiated in closed form.  The weighted
    derivative uses ``y^a d_y E = -V~ E``, so
    ``y^a W_y = E (y^a U*_y - V~ U*)`` without cancellation in ``y^a``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("W-transform samples need y > 0")
    n = V.n
    if Ustar.n != n or Ustar.components != n + 1:
        raise ShapeMismatch("U* must have n+1 components matching the potential")
    fv = Ustar.evaluate(x, t, y)
    d = V.derivatives(x, t)
    eye = np.eye(n + 1)

    def nil(vec):
        return _nilpotent(vec, "row")

    c = -y ** (2 * s) / (2 * s)
    c1 = -y ** (2 * s - 1)
    c2 = -(2 * s - 1) * y ** (2 * s - 2)
    Vv = d["V"]
    N0 = nil(d["Vx"])
    ev = np.exp(c * Vv)[:, None, None]
    C = c[:, None, None]
    C1 = c1[:, None, None]
    C2 = c2[:, None, None]
    base = eye + C * N0
    E = ev * base

    def d_first(DV, DN):
        return ev * (C * DV[:, None, None] * base + C * DN)

    Et = d_first(d["Vt"], nil(d["Vxt"]))
    Ex = [d_first(d["Vx"][i], nil(d["Vxx"][i])) for i in range(n)]
    Exx = []
    for i in range(n):
        DV = d["Vx"][i][:, None, None]
        D2V = d["Vxx"][i, i][:, None, None]
        DN = nil(d["Vxx"][i])
        D2N = nil(d["Vxxx"][:, i])
        Exx.append(ev * ((C * D2V + C**2 * DV**2) * base + 2 * C**2 * DV * DN + C * D2N))
    Vb = Vv[:, None, None]
    Ey = ev * (C1 * Vb * base + C1 * N0)
    Eyy = ev * ((C2 * Vb + C1**2 * Vb**2) * base + 2 * C1**2 * Vb * N0 + C2 * N0)

    U = fv.val
    W = _matvec(E, U)
    Wt = _matvec(Et, U) + _matvec(E, fv.dt)
    Wgrad = np.stack([_matvec(Ex[i], U) + _matvec(E, fv.grad[:, i]) for i in range(n)], axis=1)
    Wlap = sum(_matvec(Exx[i], U) + 2 * _matvec(Ex[i], fv.grad[:, i]) for i in range(n))
    Wlap = Wlap + _matvec(E, fv.lap)
    Wy = _matvec(Ey, U) + _matvec(E, fv.dy)
    Wyy = _matvec(Eyy, U) + 2 * _matvec(Ey, fv.dy) + _matvec(E, fv.dyy)
    Vt_mat = Vb * eye + N0
    ya_Wy = _matvec(E, fv.ya_dy - _matvec(Vt_mat, U))
    return WValues(W, Wt, Wgrad, Wlap, Wy, Wyy, ya_Wy)


def neumann_decay(Ustar: ModalField, V: PotentialSpec, s: float, x, t,
                  y_levels) -> tuple[np.ndarray, float]:
    """``max |y^a d_y W|`` per ladder level and the fitted log-log slope."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N = x.shape[0]
    y_levels = np.asarray(y_levels, dtype=float)
    sup = np.array([float(np.sqrt(np.sum(np.abs(
        w_transform(Ustar, V, s, x, t, np.full(N, yy)).ya_Wy) ** 2, 0)).max())
        for yy in y_levels])
    return sup, fit_loglog_slope(y_levels, sup)


def weq_ratio(Ustar: ModalField, V: PotentialSpec, s: float, x, t, y) -> float:
    """``sup |y^a W_t - d_y(y^a W_y) - y^a Lap_x W| / (y^a (|W| + |grad W|))``.

    Forward-time orientation.  Only meaningful for ``s >= 1/2``.
    """
    if s < 0.5:
        raise PreconditionViolation(f"weq ratio needs s >= 1/2 (a <= 0), got s = {s}")
    y = np.asarray(y, dtype=float)
    a = 1 - 2 * s
    w = w_transform(Ustar, V, s, x, t, y)
    ya = y**a
    num = ya * (w.Wt - w.Wyy - (a / y) * w.Wy - w.Wlap)
    num = np.sqrt(np.sum(np.abs(num) ** 2, 0))
    grad = np.sqrt(np.sum(np.abs(w.Wgrad) ** 2, axis=(0, 1)) + np.sum(np.abs(w.Wy) ** 2, 0))
    den = ya * (np.sqrt(np.sum(np.abs(w.W) ** 2, 0)) + grad)
    return float(np.max(num / den))


def reduced_system_residual(p: LameParams, Ustar: ModalField, s: float, x, t, y) -> float:
    """Relative bulk residual of the reduced system with the stated drift."""
    y = np.asarray(y, dtype=float)
    fv = Ustar.evaluate(x, t, y)
    res = bulk_operator(fv, y, s) - y ** (1 - 2 * s) * drift_apply(p, fv.grad[Ustar.n])
    scale = float(_field_scale(fv, y, s).max())
    return float(np.sqrt(np.sum(np.abs(res) ** 2, 0)).max() / scale) if scale else 0.0


def neumann_trace_residual(Ustar: ModalField, V: PotentialSpec, s: float, x, t,
                           y: float) -> float:
    """``max |y^a d_y U* - V~ U*|`` at height ``y`` (tends to 0 with ``y``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    yy = np.full(x.shape[0], float(y))
    fv = Ustar.evaluate(x, t, yy)
    M = potential_matrix(V, x, t)
    return float(np.abs(fv.ya_dy - _matvec(M, fv.val)).max())
