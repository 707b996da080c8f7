r"""Closed-form extension problem in Fourier variables.

For a mode with eigen-multiplier ``L^2`` (``L1^2 = mu|xi|^2 + i sigma`` on the
divergence-free part, ``L2^2 = (2mu+lambda)|xi|^2 + i sigma`` on the gradient
part) the extension acts through the scalar profile

.. math::
    \phi_s(z) = \frac{2^{1-s}}{\Gamma(s)} z^s K_s(z), \qquad z = L y,

which equals 1 at ``z = 0`` and solves
``phi'' + (a/z) phi' = phi`` with ``a = 1 - 2s``.  Its derivative is
``phi'(z) = -(2^{1-s}/Gamma(s)) z^s K_{1-s}(z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateInput, DomainError, InvalidExponent
from .grid import (SpectralField, VectorField, _eigenvalue_mesh, _project,
                   forward_transform, nyquist_clear, sobolev_norm)
from .macdonald import QuadratureSpec, _laplace_type_integral, kv
from .symbol import FreqPoint, LameParams, _split, eigenvalues, frac_power


def default_ladder(levels: int = 21) -> np.ndarray:
    """``{2^-j : j = 0 .. levels-1}``, strictly decreasing."""
    return 2.0 ** -np.arange(levels)


def neumann_constant(s: float) -> float:
    """``2^{2s-1} Gamma(s) / Gamma(1-s)``; exactly 1 at ``s = 1/2``."""
    if s == 0.5:
        return 1.0
    return 2.0 ** (2 * s - 1) * special.gamma(s) / special.gamma(1 - s)


def _check_s(s: float) -> None:
    if not 0 < s < 1:
        raise InvalidExponent(f"extension needs 0 < s < 1, got {s}")


def _check_y(y) -> None:
    if np.any(np.asarray(y) <= 0):
        raise DomainError("extension variable y must be positive")


def _norm_const(s: float) -> float:
    return 2.0 ** (1 - s) / special.gamma(s)


def _root(L2) -> np.ndarray:
    return np.sqrt(np.asarray(L2, dtype=complex))


def profile(L2, y, s: float) -> np.ndarray:
    """``phi_s(L y)`` broadcast over ``L2`` and ``y``; 1 where ``L2 = 0``."""
    L = _root(L2)
    z = np.broadcast_to(L * np.asarray(y, dtype=float), np.broadcast(L, y).shape)
    out = np.ones(z.shape, dtype=complex)
    nz = z != 0
    if nz.any():
        zz = z[nz]
        out[nz] = _norm_const(s) * zz**s * kv(s, zz)
    return out


def profile_dy(L2, y, s: float) -> np.ndarray:
    """``d/dy phi_s(L y) = -(2^{1-s}/Gamma(s)) L (Ly)^s K_{1-s}(Ly)``."""
    L = np.broadcast_to(_root(L2), np.broadcast(np.asarray(L2), y).shape)
    z = L * np.asarray(y, dtype=float)
    out = np.zeros(z.shape, dtype=complex)
    nz = z != 0
    if nz.any():
        zz = z[nz]
        out[nz] = -_norm_const(s) * L[nz] * zz**s * kv(1 - s, zz)
    return out


def profile_dyy(L2, y, s: float) -> np.ndarray:
    """``d^2/dy^2 phi_s(L y) = -(2^{1-s}/Gamma(s)) L^2 z^{s-1} (K_{1-s}(z) - z K_{2-s}(z))``."""
    L = np.broadcast_to(_root(L2), np.broadcast(np.asarray(L2), y).shape)
    z = L * np.asarray(y, dtype=float)
    out = np.zeros(z.shape, dtype=complex)
    nz = z != 0
    if nz.any():
        zz = z[nz]
        out[nz] = (-_norm_const(s) * L[nz] ** 2 * zz ** (s - 1)
                   * (kv(1 - s, zz) - zz * kv(2 - s, zz)))
    return out


# -- single-frequency multipliers ---------------------------------------------

def extension_multiplier(p: LameParams, f: FreqPoint, y: float, s: float) -> np.ndarray:
    _check_s(s)
    _check_y(y)
    l1, l2 = eigenvalues(p, f)
    phi = profile(np.array([l1, l2]), y, s)
    return _split(f.xi, phi[0], phi[1])


def extension_dy_multiplier(p: LameParams, f: FreqPoint, y: float, s: float) -> np.ndarray:
    _check_s(s)
    _check_y(y)
    l1, l2 = eigenvalues(p, f)
    d = profile_dy(np.array([l1, l2]), y, s)
    return _split(f.xi, d[0], d[1])


def _tau_integral(L2: complex, y: float, s: float, quad: QuadratureSpec) -> complex:
    """``int_0^inf exp(-y^2/(4 tau) - L2 tau) tau^(-1-s) dtau``."""
    if L2 == 0:
        return special.gamma(s) * (4 / y**2) ** s
    return _laplace_type_integral(-s, y * y / 4, L2, quad)


def extension_multiplier_quadrature(p: LameParams, f: FreqPoint, y: float, s: float,
                                    quad: QuadratureSpec | None = None) -> np.ndarray:
    """Extension multiplier from direct quadrature of the Poisson-kernel time integral."""
    _check_s(s)
    _check_y(y)
    quad = quad or QuadratureSpec()
    l1, l2 = eigenvalues(p, f)
    pref = y ** (2 * s) / (2 ** (2 * s) * special.gamma(s))
    i1 = pref * _tau_integral(l1, y, s, quad)
    i2 = pref * _tau_integral(l2, y, s, quad) if l2 != l1 else i1
    return _split(f.xi, i1, i2)


# -- grid fields ----------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionProfile:
    """Spectra of the extended field and its y-derivative on a ladder of levels.

    ``values`` and ``dvalues`` have shape ``(levels, n, *grid.shape)``.
    """
    s: float
    y_levels: np.ndarray
    boundary: SpectralField
    values: np.ndarray
    dvalues: np.ndarray

    @property
    def a(self) -> float:
        return 1 - 2 * self.s

    @property
    def grid(self):
        return self.boundary.grid


_ACTIVE_REL = 1e-13


def _active(g: SpectralField) -> np.ndarray:
    """Modes carrying more than round-off relative to the largest amplitude."""
    amp = np.abs(g.modes).max(axis=0)
    top = amp.max()
    return amp > _ACTIVE_REL * top if top > 0 else np.zeros(amp.shape, dtype=bool)


def _split_levels(xi, xi2, v, c_perp, c_par):
    # v: (n, m) modes on active set; c: (levels, m)
    pv = _project(xi, xi2, v)
    return c_perp[:, None, :] * v[None] + (c_par - c_perp)[:, None, :] * pv[None]


def extend(p: LameParams, u: VectorField, s: float,
           y_levels: np.ndarray | None = None) -> ExtensionProfile:
    _check_s(s)
    y = default_ladder() if y_levels is None else np.asarray(y_levels, dtype=float)
    _check_y(y)
    if y.ndim != 1 or np.any(np.diff(y) >= 0):
        raise ValueError("y_levels must be strictly decreasing")
    g = nyquist_clear(forward_transform(u))
    xi, xi2, l1, l2 = _eigenvalue_mesh(p, u.grid)
    act = _active(g)
    g = SpectralField(g.grid, np.where(act, g.modes, 0))
    xa, x2a = xi[:, act], xi2[act]
    va = g.modes[:, act]
    yy = y[:, None]
    vals = _split_levels(xa, x2a, va, profile(l1[act], yy, s), profile(l2[act], yy, s))
    dvals = _split_levels(xa, x2a, va, profile_dy(l1[act], yy, s), profile_dy(l2[act], yy, s))
    shape = (y.size,) + g.modes.shape
    values = np.zeros(shape, dtype=complex)
    dvalues = np.zeros(shape, dtype=complex)
    values[:, :, act] = vals
    dvalues[:, :, act] = dvals
    return ExtensionProfile(s, y, g, values, dvalues)


def dirichlet_trace_error(p: LameParams, u: VectorField, s: float, y) -> np.ndarray | float:
    """Relative ``H^s`` distance between the extension at height ``y`` and ``u``."""
    prof = extend(p, u, s, np.atleast_1d(np.asarray(y, dtype=float)))
    base = sobolev_norm(prof.boundary, s)
    if base == 0:
        raise DegenerateInput("zero boundary datum")
    errs = np.array([sobolev_norm(SpectralField(prof.grid, v - prof.boundary.modes), s) / base
                     for v in prof.values])
    return errs if np.ndim(y) else float(errs[0])


def neumann_trace_error(p: LameParams, u: VectorField, s: float, y) -> np.ndarray | float:
    """Relative ``H^{-s}`` distance between ``c_s y^a d_y u~`` and ``-H^s u``."""
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    prof = extend(p, u, s, yv)
    g = prof.boundary
    xi, xi2, l1, l2 = _eigenvalue_mesh(p, g.grid)
    hs = g.modes.copy()
    act = np.any(hs != 0, axis=0)
    pw1 = np.zeros_like(l1)
    pw2 = np.zeros_like(l2)
    pw1[act] = l1[act] ** s
    pw2[act] = l2[act] ** s
    pv = _project(xi, xi2, hs)
    hs = pw1 * hs + (pw2 - pw1) * pv
    base = sobolev_norm(SpectralField(g.grid, hs), -s)
    if base == 0:
        raise DegenerateInput("H^s u vanishes; Neumann error undefined")
    c = neumann_constant(s)
    a = 1 - 2 * s
    errs = np.array([sobolev_norm(SpectralField(g.grid, c * yy**a * dv + hs), -s) / base
                     for yy, dv in zip(yv, prof.dvalues)])
    return errs if np.ndim(y) else float(errs[0])


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x)), np.log(np.asarray(y))
    return float(np.polyfit(lx, ly, 1)[0])


# -- Poisson kernel -----------------------------------------------------------

def poisson_factor(y, t, s: float):
    """Scalar factor ``y^{2s} t^{-1-s} exp(-y^2/4t) / (2^{2s} Gamma(s))``."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    return (y ** (2 * s) * t ** (-1 - s) * np.exp(-y * y / (4 * t))
            / (2 ** (2 * s) * special.gamma(s)))


def poisson_kernel_residual(p: LameParams, s: float, points, xis=None,
                            h: float = 1e-4) -> float:
    """Largest relative defect of the Poisson-kernel identities at ``points``.

    ``points`` holds ``(y, t)`` pairs.  Finite differences of the scalar
    factor ``q`` are compared with ``(y^2/4t^2 - (1+s)/t) q`` both for
    ``d_y^2 + (a/y) d_y`` and for ``d_t``.  When ``xis`` is given, the
    spatial Fourier transform ``q(y,t) W_hat(xi,t)`` is also checked against
    ``(d_t + A_0(xi))`` with the Lame heat multiplier.
    """
    _check_s(s)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    y, t = pts[:, 0], pts[:, 1]
    if np.any(y <= 0) or np.any(t <= 0):
        raise DomainError("Poisson kernel needs y > 0 and t > 0")
    a = 1 - 2 * s
    q = poisson_factor(y, t, s)
    factor = y * y / (4 * t * t) - (1 + s) / t
    scale = np.abs(q) * (y * y / (4 * t * t) + (1 + s) / t)
    hy = h * y
    qyy = (poisson_factor(y + hy, t, s) - 2 * q + poisson_factor(y - hy, t, s)) / hy**2
    qy = (poisson_factor(y + hy, t, s) - poisson_factor(y - hy, t, s)) / (2 * hy)
    ht = h * t
    qt = (poisson_factor(y, t + ht, s) - poisson_factor(y, t - ht, s)) / (2 * ht)
    res = np.maximum(np.abs(qyy + a / y * qy - factor * q), np.abs(qt - factor * q)) / scale
    worst = float(res.max())
    if xis is not None:
        from .symbol import heat_multiplier
        for yi, ti, xi in zip(y, t, np.atleast_2d(xis)):
            A0 = (p.mu * (xi @ xi) * np.eye(xi.size) + (p.mu + p.lam) * np.outer(xi, xi))

            def kernel(tt):
                return poisson_factor(yi, tt, s) * heat_multiplier(p, xi, tt)
            dt = h * ti
            lhs = (kernel(ti + dt) - kernel(ti - dt)) / (2 * dt) + A0 @ kernel(ti)
            f = yi * yi / (4 * ti * ti) - (1 + s) / ti
            sc = abs(poisson_factor(yi, ti, s)) * (yi * yi / (4 * ti * ti) + (1 + s) / ti)
            worst = max(worst, float(np.abs(lhs - f * kernel(ti)).max() / sc))
    return worst


# -- energy -----------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    bulk_l2: float
    bulk_grad: float
    l2_constant: float
    grad_bound: float
    grad_constant: float


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _log_nodes(lo: float, hi: float, width: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    panels = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_NODES[None]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None]).ravel()
    return u, w


def _mode_weights(p: LameParams, u: VectorField):
    g = nyquist_clear(forward_transform(u))
    xi, xi2, l1, l2 = _eigenvalue_mesh(p, u.grid)
    act = _active(g)
    v = g.modes[:, act]
    pv = _project(xi[:, act], xi2[act], v)
    w_par = np.sum(np.abs(pv) ** 2, axis=0)
    w_perp = np.sum(np.abs(v - pv) ** 2, axis=0)
    return xi2[act], l1[act], l2[act], w_perp, w_par


def asymptotic_energy_integral(s: float, L: complex = 1.0) -> float:
    """``int_0^inf y |L|^2 (|K_s(Ly)|^2 + |K_{1-s}(Ly)|^2) dy``.

    Substituting ``v = |L| y`` shows the value depends on ``arg L`` only.
    """
    L = complex(L)
    c = -math.log(abs(L))
    u, w = _log_nodes(c - 40.0, c + math.log(80.0))
    y = np.exp(u)
    z = L * y
    f = y * y * abs(L) ** 2 * (np.abs(kv(s, z)) ** 2 + np.abs(kv(1 - s, z)) ** 2)
    return float(f @ w)


def _mode_integrals(L2: np.ndarray, xi2: np.ndarray, s: float, lo: float, hi: float):
    """Per-mode ``int y^a |phi|^2`` and ``int y^a (|xi|^2|phi|^2 + |phi_y|^2)`` in log y."""
    a = 1 - 2 * s
    u, w = _log_nodes(lo, hi)
    y = np.exp(u)[:, None]
    phi = profile(L2[None, :], y, s)
    dphi = profile_dy(L2[None, :], y, s)
    jac = y ** (1 + a)
    l2 = (jac * np.abs(phi) ** 2 * w[:, None]).sum(0)
    grad = (jac * (xi2[None] * np.abs(phi) ** 2 + np.abs(dphi) ** 2) * w[:, None]).sum(0)
    return l2, grad


def energy_integrals(p: LameParams, u: VectorField, s: float, M: float) -> EnergyReport:
    """Weighted bulk integrals of the extension from per-mode closed forms.

    ``bulk_l2 = int_0^M y^a |u~|^2`` and
    ``bulk_grad = int_0^inf y^a (|grad_x u~|^2 + |d_y u~|^2)``, summed over
    modes with the discrete Plancherel identity.  Integration runs over
    ``log y`` with composite Gauss-Legendre panels; the lower cutoff leaves a
    neglected piece below ``1e-26`` relative.
    """
    _check_s(s)
    if M <= 0:
        raise DomainError("M must be positive")
    xi2, l1, l2, w_perp, w_par = _mode_weights(p, u)
    total = float(np.sum(w_perp + w_par))
    if total == 0:
        return EnergyReport(0.0, 0.0, 0.0, 0.0, 0.0)
    a = 1 - 2 * s
    L2 = np.concatenate([l1, l2])
    X2 = np.concatenate([xi2, xi2])
    W = np.concatenate([w_perp, w_par])
    keep = W > 0
    L2, X2, W = L2[keep], X2[keep], W[keep]
    # y^(1+a) vanishes like e^{(1+a) v}; 60/(1+a) e-folds suffice
    lo = math.log(M) - 60.0 / (1 + a)
    l2_part, _ = _mode_integrals(L2, X2, s, lo, math.log(M))
    bulk_l2 = float(l2_part @ W)

    nz = L2 != 0
    bulk_grad = 0.0
    if nz.any():
        rmin = float(np.sqrt(L2[nz]).real.min())
        hi = math.log(60.0 / rmin)
        # |phi_y|^2 y^(1+a) ~ y^(1-a) near 0
        lo_g = min(-0.5 * float(np.log(np.abs(L2[nz])).max()), 0.0) - 60.0 / min(1 - a, 1 + a)
        _, grad = _mode_integrals(L2[nz], X2[nz], s, lo_g, hi)
        bulk_grad = float(grad @ W[nz])

    # per-mode bound through the scale-free integral at each mode's argument
    c2 = _norm_const(s) ** 2
    speeds = np.concatenate([np.full(l1.size, p.c1), np.full(l2.size, p.c2)])[keep]
    gvals = np.array([asymptotic_energy_integral(s, L / abs(L))
                      for L in np.sqrt(L2[nz].astype(complex))])
    gmax = float(gvals.max()) if gvals.size else 0.0
    bound = float(np.sum(c2 * np.maximum(1.0, 1.0 / speeds[nz]) * np.abs(L2[nz]) ** s
                         * gvals * W[nz]))
    return EnergyReport(bulk_l2=bulk_l2, bulk_grad=bulk_grad,
                        l2_constant=bulk_l2 / (M ** (1 + a) * total),
                        grad_bound=bound, grad_constant=c2 * gmax)


# -- export ---------------------------------------------------------------------------

PROFILE_COLUMNS = ("mode", "y", "abs_value", "abs_dy_value", "dirichlet_err", "neumann_err")


def profile_rows(p: LameParams, u: VectorField, s: float, y_levels=None):
    """Rows ``(k_1..k_n, m, y, |u~^|, |d_y u~^|, dirichlet_err, neumann_err)``.

    Mode indices are the signed integer lattice indices; the error columns are
    the field-level relative errors at that height.
    """
    prof = extend(p, u, s, y_levels)
    d = dirichlet_trace_error(p, u, s, prof.y_levels)
    nm = neumann_trace_error(p, u, s, prof.y_levels)
    grid = prof.grid
    idx = np.meshgrid(*[np.fft.fftfreq(N, d=1.0 / N).astype(int) for N in grid.shape],
                      indexing="ij")
    act = _active(prof.boundary)
    modes = np.stack([i[act] for i in idx], axis=1)
    for j, y in enumerate(prof.y_levels):
        val = np.linalg.norm(prof.values[j][:, act], axis=0)
        dval = np.linalg.norm(prof.dvalues[j][:, act], axis=0)
        for m, a, b in zip(modes, val, dval):
            yield tuple(int(c) for c in m) + (float(y), float(a), float(b),
                                               float(d[j]), float(nm[j]))
