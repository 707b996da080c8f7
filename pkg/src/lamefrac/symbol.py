"""Frequency-side algebra of the parabolic Lame operator.

Every matrix built here is of the form ``c1 * I + (c2 - c1) * P(xi)`` with the
rank-one projector ``P(xi) = xi xi^T / |xi|^2``.  The symbol

    A(xi, sigma) = (mu |xi|^2 + i sigma) I + (mu + lambda) xi xi^T

has eigenvalue ``mu |xi|^2 + i sigma`` on the orthogonal complement of ``xi``
and ``(2 mu + lambda) |xi|^2 + i sigma`` along ``xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, special

from .errors import (DegenerateFrequency, EllipticityViolation, InvalidExponent,
                     QuadratureFailure)
from .macdonald import QuadratureSpec


@dataclass(frozen=True)
class LameParams:
    mu: float
    lam: float
    delta0: float = 1e-3

    def __post_init__(self):
        if not self.delta0 > 0:
            raise EllipticityViolation("delta0 must be positive")
        if self.mu < self.delta0:
            raise EllipticityViolation(
                f"mu = {self.mu} violates mu >= delta0 = {self.delta0}")
        if 2 * self.mu + self.lam < self.delta0:
            raise EllipticityViolation(
                f"2 mu + lambda = {2 * self.mu + self.lam} violates "
                f"2 mu + lambda >= delta0 = {self.delta0}")

    @property
    def c1(self) -> float:
        """Speed of divergence-free (shear) modes."""
        return self.mu

    @property
    def c2(self) -> float:
        """Speed of gradient (pressure) modes."""
        return 2 * self.mu + self.lam

    @property
    def speeds(self) -> tuple[float, float]:
        return self.c1, self.c2

    @property
    def legendre_hadamard(self) -> float:
        return min(self.c1, self.c2)


def validate_params(mu: float, lam: float, delta0: float) -> LameParams:
    return LameParams(float(mu), float(lam), float(delta0))


@dataclass(frozen=True)
class FreqPoint:
    xi: np.ndarray
    sigma: float

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if xi.ndim != 1 or not np.all(np.isfinite(xi)) or not math.isfinite(self.sigma):
            raise ValueError("FreqPoint needs a finite 1-d xi and finite sigma")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n(self) -> int:
        return self.xi.size

    @property
    def xi2(self) -> float:
        return float(self.xi @ self.xi)


def eigenvalues(p: LameParams, f: FreqPoint) -> tuple[complex, complex]:
    """``(L1^2, L2^2) = (mu|xi|^2 + i sigma, (2mu+lambda)|xi|^2 + i sigma)``."""
    return complex(p.c1 * f.xi2, f.sigma), complex(p.c2 * f.xi2, f.sigma)


def projector(xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r2 = xi @ xi
    if r2 == 0:
        return np.zeros((xi.size, xi.size))
    return np.outer(xi, xi) / r2


def _split(xi: np.ndarray, c_perp: complex, c_par: complex) -> np.ndarray:
    n = xi.size
    return c_perp * np.eye(n, dtype=complex) + (c_par - c_perp) * projector(xi)


def symbol_matrix(p: LameParams, f: FreqPoint) -> np.ndarray:
    n = f.n
    return ((p.mu * f.xi2 + 1j * f.sigma) * np.eye(n, dtype=complex)
            + (p.mu + p.lam) * np.outer(f.xi, f.xi))


def heat_multiplier(p: LameParams, xi, t: float) -> np.ndarray:
    """Fourier multiplier of the Lame heat semigroup at time ``t``."""
    if t < 0:
        raise ValueError("heat_multiplier needs t >= 0")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r2 = xi @ xi
    return _split(xi, math.exp(-p.c1 * r2 * t), math.exp(-p.c2 * r2 * t))


def evolutive_multiplier(p: LameParams, f: FreqPoint, tau: complex) -> np.ndarray:
    """Multiplier of ``exp(-tau H)``; complex ``tau`` is allowed internally."""
    if np.real(tau) < 0:
        raise ValueError("evolutive_multiplier needs tau >= 0")
    l1, l2 = eigenvalues(p, f)
    return _split(f.xi, np.exp(-tau * l1), np.exp(-tau * l2))


def _principal_power(z: complex, s: float) -> complex:
    if z == 0:
        return 0j
    return complex(z) ** s


def _check_exponent(s: float, allow_one: bool = True) -> None:
    upper_ok = s <= 1 if allow_one else s < 1
    if not (s > 0 and upper_ok):
        raise InvalidExponent(f"exponent s = {s} outside the admissible range")


def frac_power(p: LameParams, f: FreqPoint, s: float) -> np.ndarray:
    """``A(xi, sigma)^s`` from the two-eigenvalue formula (principal branch)."""
    _check_exponent(s)
    l1, l2 = eigenvalues(p, f)
    return _split(f.xi, _principal_power(l1, s), _principal_power(l2, s))


def rotation_to_e1(xi) -> np.ndarray:
    """Orthogonal ``R`` with ``R xi = |xi| e1``.

    A Householder reflection maps ``xi/|xi|`` to ``e1`` up to a sign; the sign
    is absorbed by flipping the first row.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = math.sqrt(xi @ xi)
    if r == 0:
        raise DegenerateFrequency("rotation undefined at xi = 0")
    n = xi.size
    u = xi / r
    e1 = np.zeros(n)
    e1[0] = 1.0
    # reflect u onto -sign(u0) e1 (stable choice), then fix the sign
    alpha = -1.0 if u[0] >= 0 else 1.0
    v = u - alpha * e1
    vv = v @ v
    if vv < 1e-300:
        return np.eye(n)
    H = np.eye(n) - 2.0 * np.outer(v, v) / vv
    R = H.copy()
    if alpha < 0:
        R[0] *= -1.0
    return R


def frac_power_rotation(p: LameParams, f: FreqPoint, s: float) -> np.ndarray:
    if f.xi2 == 0:
        raise DegenerateFrequency("rotation path needs xi != 0")
    _check_exponent(s)
    R = rotation_to_e1(f.xi)
    l1, l2 = eigenvalues(p, f)
    diag = np.full(f.n, _principal_power(l1, s), dtype=complex)
    diag[0] = _principal_power(l2, s)
    return R.T @ np.diag(diag) @ R


_SERIES_CUTOFF = 1e-3


def frac_power_subordination(p: LameParams, f: FreqPoint, s: float,
                             quad: QuadratureSpec | None = None) -> np.ndarray:
    r"""``A^s`` from the Balakrishnan integral of the evolutive semigroup.

    .. math::
        A^s = -\frac{s}{\Gamma(1-s)} \int_0^\infty (e^{-\tau A} - I)
              \frac{d\tau}{\tau^{1+s}}

    ``e^{-tau A}`` is computed with a generic matrix exponential.  The ray of
    integration is rotated by ``-(arg L1^2 + arg L2^2)/2`` so that the
    semigroup decays along it; on ``[0, eps]`` the exponential series is
    integrated term by term, beyond ``R`` only the ``-I`` term survives and is
    integrated exactly.
    """
    _check_exponent(s, allow_one=False)
    quad = quad or QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)
    l1, l2 = eigenvalues(p, f)
    if l1 == 0 and l2 == 0:
        raise DegenerateFrequency("(xi, sigma) = (0, 0)")
    A = symbol_matrix(p, f)
    n = f.n
    eye = np.eye(n, dtype=complex)
    phi = 0.5 * (np.angle(l1) + np.angle(l2))
    omega = np.exp(-1j * phi)
    rate = min((l1 * omega).real, (l2 * omega).real)
    spectral = max(abs(l1), abs(l2))
    tau_star = 1.0 / abs(l1) if l1 != 0 else 1.0 / abs(l2)
    eps = _SERIES_CUTOFF * min(tau_star, 1.0 / spectral)
    big = 60.0 / rate

    # [0, eps]: sum_k (-A)^k/k! * omega^(k-s) eps^(k-s)/(k-s); eps is folded
    # into the power so tiny eigenvalues (huge eps) cannot overflow
    head = np.zeros((n, n), dtype=complex)
    power = eye.copy()
    for k in range(1, 12):
        power = power @ (-eps * A) / k
        head += power * omega ** (k - s) * eps ** (-s) / (k - s)

    def integrand(u):
        r = math.exp(u)
        tau = r * omega
        g = (linalg.expm(-tau * A) - eye) * (tau ** (-1 - s)) * omega * r
        return np.concatenate([g.real.ravel(), g.imag.ravel()])

    pts = sorted({math.log(tau_star), math.log(1.0 / spectral)})
    lo, hi = math.log(eps), math.log(big)
    edges = [lo] + [x for x in pts if lo < x < hi] + [hi]
    body = np.zeros(2 * n * n)
    for a, b in zip(edges[:-1], edges[1:]):
        val, err, info = integrate.quad_vec(
            integrand, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
            limit=quad.max_subdivisions, full_output=True)
        if not info.success:
            raise QuadratureFailure(f"subordination quadrature failed: {info.message}")
        body += val
    body = (body[: n * n] + 1j * body[n * n:]).reshape(n, n)
    # (R, inf): only -I tau^(-1-s) remains
    tail = -eye * omega ** (-s) * big ** (-s) / s
    return -s / special.gamma(1 - s) * (head + body + tail)


def legendre_hadamard_min(p: LameParams, n: int, samples: int = 1000,
                          rng: np.random.Generator | None = None) -> float:
    """Minimum of ``sum A^{ij}_{ab} xi_a xi_b eta^i eta^j`` over unit ``xi, eta``.

    With ``A^{ij}_{ab} = mu delta_ij delta_ab + (mu+lambda) delta_ai delta_bj``
    the form equals ``mu |xi|^2|eta|^2 + (mu+lambda)(xi.eta)^2``.  The tensor is
    contracted explicitly on a lattice of sphere points; the lattice always
    contains pairs with ``eta = xi`` and ``eta`` orthogonal to ``xi``.
    """
    rng = rng or np.random.default_rng(0)
    tensor = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for a in range(n):
                for b in range(n):
                    tensor[i, j, a, b] = (p.mu * (i == j) * (a == b)
                                          + (p.mu + p.lam) * (a == i) * (b == j))
    xi = rng.normal(size=(samples, n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    eta = rng.normal(size=(samples, n))
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    # append aligned and orthogonal pairs where the extremes are attained
    eta_par = xi.copy()
    if n > 1:
        orth = eta - (eta * xi).sum(1, keepdims=True) * xi
        orth /= np.linalg.norm(orth, axis=1, keepdims=True)
        xi = np.concatenate([xi, xi, xi])
        eta = np.concatenate([eta, eta_par, orth])
    else:
        xi = np.concatenate([xi, xi])
        eta = np.concatenate([eta, eta_par])
    vals = np.einsum("ijab,ka,kb,ki,kj->k", tensor, xi, xi, eta, eta)
    return float(vals.min())
