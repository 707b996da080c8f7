r"""Macdonald functions :math:`K_\nu(z)` for complex ``z`` with ``Re z > 0``.

Three evaluation routes are combined:

* ``|z| <= SERIES_MAX``: the reflection formula
  :math:`K_\nu = \frac{\pi}{2}\frac{I_{-\nu} - I_\nu}{\sin \nu\pi}` with
  power series for :math:`I_{\pm\nu}`.
* ``SERIES_MAX < |z| <= ASYMPTOTIC_MIN``: the trapezoidal rule applied to
  :math:`K_\nu(z) = \int_0^\infty e^{-z\cosh t}\cosh(\nu t)\,dt`, which
  converges geometrically for analytic integrands of this kind.
* ``|z| > ASYMPTOTIC_MIN``: the Hankel large-argument expansion, truncated
  at its smallest term.

Half-integer orders bypass all three and use the elementary closed forms.

The integral

.. math::
    \int_0^\infty \tau^{\nu-1} e^{-(\beta/\tau + \gamma\tau)}\,d\tau
    = 2 (\beta/\gamma)^{\nu/2} K_\nu(2\sqrt{\beta\gamma})

is evaluated independently by adaptive quadrature in
:func:`subordination_integral` and serves as the oracle for the routes above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, OrderError, QuadratureFailure

SERIES_MAX = 2.0
ASYMPTOTIC_MIN = 17.0
_SERIES_TERMS = 40
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-15
    max_subdivisions: int = 400

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be at least 16")


@dataclass(frozen=True)
class MacdonaldValue:
    nu: float
    z: complex
    value: complex
    est_error: float


def _is_half_integer(nu: float) -> bool:
    return abs(abs(nu) % 1.0 - 0.5) < 1e-15


def _check_order(nu: float) -> None:
    if abs(nu - round(nu)) < 1e-12:
        raise OrderError(f"integer order {nu} is not supported")


def _as_complex_array(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _half_integer(nu: float, z: np.ndarray) -> np.ndarray:
    # K_{1/2} and K_{3/2} in closed form, upward recurrence beyond.
    m = int(round(abs(nu) - 0.5))
    k_prev = np.sqrt(np.pi / (2 * z)) * np.exp(-z)
    if m == 0:
        return k_prev
    k_cur = k_prev * (1 + 1 / z)
    for j in range(1, m):
        order = j + 0.5
        k_prev, k_cur = k_cur, k_prev + (2 * order / z) * k_cur
    return k_cur


def _series(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = z / 2
    q = half * half
    k = np.arange(_SERIES_TERMS)
    logfact = special.gammaln(k + 1)

    def i_series(order):
        coef = special.rgamma(k + order + 1) * np.exp(-logfact)
        # Horner in q, highest power first.
        acc = np.zeros_like(z)
        for c in coef[::-1]:
            acc = acc * q + c
        return half**order * acc

    i_neg = i_series(-nu)
    i_pos = i_series(nu)
    sin = math.sin(nu * math.pi)
    value = (np.pi / 2) * (i_neg - i_pos) / sin
    scale = (np.pi / 2) * (np.abs(i_neg) + np.abs(i_pos)) / abs(sin)
    return value, 16 * _EPS * scale


def _trapezoid(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # one step and cutoff shared by the batch, chosen for its worst member
    theta = float(np.abs(np.angle(z)).max())
    h = min(0.1, (math.pi / 2 - theta) / 6)
    re_min = float(z.real.min())
    # e^{-Re z (cosh T - 1)} below ~1e-18 relative to the e^{-Re z} scale
    t_max = math.acosh(1 + (42 + abs(nu) * 4) / re_min) + abs(nu) * 0.5
    t = np.arange(0.0, t_max + h, h)
    w = np.full(t.size, h)
    w[0] = h / 2
    flat = z.ravel()
    out = np.empty_like(flat)
    err = np.empty(flat.shape)
    chunk = max(1, 200_000 // t.size)
    for i in range(0, flat.size, chunk):
        zz = flat[i:i + chunk, None]
        f = np.exp(-zz * np.cosh(t)) * np.cosh(nu * t)
        out[i:i + chunk] = f @ w
        err[i:i + chunk] = 64 * _EPS * (np.abs(f) @ w)
    return out.reshape(z.shape), err.reshape(z.shape)


def _asymptotic(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu4 = 4 * nu * nu
    total = np.ones_like(z)
    term = np.ones_like(z)
    last = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    err = np.zeros(z.shape)
    for k in range(1, 60):
        new = term * (mu4 - (2 * k - 1) ** 2) / (k * 8 * z)
        mag = np.abs(new)
        # stop each entry once terms stop shrinking
        active &= mag < last
        if not active.any():
            break
        total = np.where(active, total + new, total)
        err = np.where(active, mag, err)
        term = np.where(active, new, term)
        last = np.where(active, mag, last)
        active &= mag > _EPS * np.abs(total) * 1e-2
    prefactor = np.sqrt(np.pi / (2 * z)) * np.exp(-z)
    return prefactor * total, np.abs(prefactor) * (err + 4 * _EPS)


def kv(nu: float, z) -> np.ndarray:
    """Vectorised :math:`K_\\nu(z)`; ``z`` may be any array with ``Re z > 0``."""
    nu = abs(float(nu))
    value, _ = _kv_with_error(nu, _as_complex_array(z))
    return value


def _kv_with_error(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.any(z.real <= 0):
        raise DomainError("Macdonald function requires Re z > 0")
    if _is_half_integer(nu):
        value = _half_integer(nu, z)
        return value, 8 * _EPS * np.abs(value)
    _check_order(nu)
    value = np.empty_like(z)
    err = np.empty(z.shape)
    r = np.abs(z)
    routes = (
        (r <= SERIES_MAX, _series),
        ((r > SERIES_MAX) & (r <= ASYMPTOTIC_MIN), _trapezoid),
        (r > ASYMPTOTIC_MIN, _asymptotic),
    )
    for mask, route in routes:
        if mask.any():
            v, e = route(nu, z[mask])
            value[mask] = v
            err[mask] = e
    return value, err


def bessel_k(nu: float, z: complex) -> MacdonaldValue:
    """Scalar Macdonald function with an error estimate.

    ``K_{-nu} = K_nu`` is enforced by evaluating at ``|nu|``.
    """
    z = complex(z)
    value, err = _kv_with_error(abs(float(nu)), np.array([z]))
    v = complex(value[0])
    if z.imag == 0:
        v = complex(v.real, 0.0)
    return MacdonaldValue(nu=float(nu), z=z, value=v, est_error=float(err[0]))


def bessel_k_derivative(nu: float, z: complex) -> complex:
    """:math:`K_\\nu'(z) = (\\nu/z) K_\\nu(z) - K_{\\nu+1}(z)`."""
    z = complex(z)
    return (nu / z) * bessel_k(nu, z).value - bessel_k(nu + 1, z).value


def kv_derivative(nu: float, z) -> np.ndarray:
    z = _as_complex_array(z)
    return (nu / z) * kv(nu, z) - kv(nu + 1, z)


def _laplace_type_integral(nu: float, beta: complex, gamma: complex,
                           quad: QuadratureSpec) -> complex:
    """Quadrature of int_0^inf tau^(nu-1) exp(-(beta/tau + gamma tau)) dtau.

    The ray tau = r*omega is rotated so that beta/tau and gamma*tau share an
    argument; this keeps the integrand non-oscillatory to leading order and
    extends the method to Re gamma = 0 (gamma != 0).  Then r = e^u.
    """
    beta = complex(beta)
    gamma = complex(gamma)
    phi = 0.5 * (np.angle(beta) - np.angle(gamma))
    omega = complex(np.exp(1j * phi))
    b = beta / omega
    g = gamma * omega
    if b.real <= 0 or g.real <= 0:
        raise DomainError("integral diverges for the given beta, gamma")

    def integrand(u):
        return np.exp(nu * u - b * np.exp(-u) - g * np.exp(u))

    # exponent real part: nu*u - Re(b) e^-u - Re(g) e^u; bracket where < -60
    u0 = 0.5 * math.log(b.real / g.real)
    lo = u0 - 1.0
    while nu * lo - b.real * math.exp(-lo) > -75 + nu * u0 - 2 * math.sqrt(b.real * g.real):
        lo -= 0.5
    hi = u0 + 1.0
    while nu * hi - g.real * math.exp(hi) > -75 + nu * u0 - 2 * math.sqrt(b.real * g.real):
        hi += 0.5
    val, err, info = integrate.quad(
        integrand, lo, hi, points=[u0], complex_func=True,
        epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions,
        full_output=True,
    )
    total_err = abs(err)
    if total_err > max(quad.abs_tol, quad.rel_tol * abs(val)) * 1e3:
        raise QuadratureFailure(
            f"subordination integral error estimate {total_err:.3e} too large")
    return complex(omega**nu * val)


def subordination_integral(nu: float, beta: complex, gamma: complex,
                           quad: QuadratureSpec | None = None) -> complex:
    """Adaptive quadrature of the Macdonald integral identity's left side."""
    beta = complex(beta)
    gamma = complex(gamma)
    if beta.real <= 0 or gamma.real <= 0:
        raise DomainError("subordination integral needs Re beta > 0 and Re gamma > 0")
    return _laplace_type_integral(nu, beta, gamma, quad or QuadratureSpec())


def subordination_closed_form(nu: float, beta: complex, gamma: complex) -> complex:
    """Right side of the Macdonald identity, 2 (beta/gamma)^(nu/2) K_nu(2 sqrt(beta gamma))."""
    beta = complex(beta)
    gamma = complex(gamma)
    z = 2 * np.sqrt(beta) * np.sqrt(gamma)
    ratio = np.sqrt(beta) / np.sqrt(gamma)
    return complex(2 * ratio**nu * bessel_k(nu, z).value)


def scaled_kv(s: float, z) -> np.ndarray:
    """:math:`z^s K_s(z)` with the value ``2^{s-1} Gamma(s)`` at ``z = 0``."""
    z = _as_complex_array(z)
    out = np.full(z.shape, 2.0 ** (s - 1) * special.gamma(s), dtype=complex)
    nz = z != 0
    if nz.any():
        out[nz] = z[nz] ** s * kv(s, z[nz])
    return out
