"""Finite sums of separated modes ``coef * f(y) * exp(i (q.x + sigma t))``.

A :class:`ModalField` is evaluated pointwise together with its analytic
derivatives in ``t``, ``x`` and ``y``.  The ``y``-profiles are either the
decaying Macdonald profile of the extension problem or one of two power-series
solutions of ``F'' + (a/y) F' = L^2 F`` (even: ``F(0) = 1``; odd:
``y^a F' -> 1``), optionally differentiated with respect to ``L^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeMismatch
from .extension import profile, profile_dy, profile_dyy


@dataclass(frozen=True)
class ProfileValues:
    f: np.ndarray
    fy: np.ndarray
    fyy: np.ndarray
    ya_fy: np.ndarray


@dataclass(frozen=True)
class MacdonaldProfile:
    L2: complex
    s: float

    def __call__(self, y: np.ndarray) -> ProfileValues:
        a = 1 - 2 * self.s
        fy = profile_dy(self.L2, y, self.s)
        return ProfileValues(profile(self.L2, y, self.s), fy,
                             profile_dyy(self.L2, y, self.s), y**a * fy)


_MAX_TERMS = 400


@dataclass(frozen=True)
class SeriesProfile:
    """``F = sum_j c_j y^(2j+p)`` with ``p = 0`` (even) or ``p = 2s`` (odd).

    ``c_j (2j+p)(2j+p-1+a) = L^2 c_{j-1}``; ``c_0 = 1`` for the even kind and
    ``1/(2s)`` for the odd kind.  With ``dL2=True`` the coefficients are
    replaced by their ``L^2``-derivatives, which yields a solution of
    ``G'' + (a/y) G' - L^2 G = F``.
    """
    L2: complex
    s: float
    kind: str = "even"
    dL2: bool = False

    def __post_init__(self):
        if self.kind not in ("even", "odd"):
            raise ValueError("kind must be 'even' or 'odd'")

    def _coefficients(self, ymax: float) -> tuple[np.ndarray, float]:
        s = self.s
        p = 0.0 if self.kind == "even" else 2 * s
        c0 = 1.0 if self.kind == "even" else 1.0 / (2 * s)
        L2 = complex(self.L2)
        # c_j = c0 L2^j / prod_{i<=j} d_i ; d/dL2 c_j = j c0 L2^(j-1) / prod
        coef = [c0 + 0j]
        dcoef = [0j]
        prod = 1.0
        power = 1 + 0j  # L2^(j-1)
        for j in range(1, _MAX_TERMS):
            d = 4 * j * (j + (s if self.kind == "odd" else -s))
            prod *= d
            dcoef.append(j * c0 * power / prod)
            power *= L2
            coef.append(c0 * power / prod)
            tail = max(abs(coef[-1]), abs(dcoef[-1])) * max(ymax, 1.0) ** (2 * j)
            if j > 4 and tail < 1e-18 * max(abs(c0), 1e-300):
                break
        else:
            raise DomainError("series profile did not converge; |L^2| y^2 too large")
        return np.array(dcoef if self.dL2 else coef), p

    def __call__(self, y: np.ndarray) -> ProfileValues:
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise DomainError("profiles are evaluated at y > 0")
        a = 1 - 2 * self.s
        c, p = self._coefficients(float(y.max()))
        j = np.arange(c.size)
        e = 2 * j + p
        Y = y[..., None]
        f = (c * Y**e).sum(-1)
        fy = (c * e * Y ** (e - 1)).sum(-1)
        fyy = (c * e * (e - 1) * Y ** (e - 2)).sum(-1)
        ya_fy = (c * e * Y ** (e - 1 + a)).sum(-1)
        return ProfileValues(f, fy, fyy, ya_fy)


@dataclass(frozen=True)
class Term:
    comp: int
    q: np.ndarray
    sigma: float
    profile: object
    coef: complex


@dataclass(frozen=True)
class FieldValues:
    """Pointwise values and derivatives, component-major with shape ``(C, N)``."""
    val: np.ndarray
    dt: np.ndarray
    grad: np.ndarray  # (C, n, N)
    lap: np.ndarray
    dy: np.ndarray
    dyy: np.ndarray
    ya_dy: np.ndarray


@dataclass(frozen=True)
class ModalField:
    n: int
    components: int
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __add__(self, other: "ModalField") -> "ModalField":
        if (self.n, self.components) != (other.n, other.components):
            raise ShapeMismatch("cannot add modal fields of different shapes")
        return ModalField(self.n, self.components, self.terms + other.terms)

    def scaled(self, factor: complex) -> "ModalField":
        return ModalField(self.n, self.components,
                          tuple(Term(t.comp, t.q, t.sigma, t.profile, t.coef * factor)
                                for t in self.terms))

    def evaluate(self, x: np.ndarray, t: np.ndarray, y: np.ndarray) -> FieldValues:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        N = x.shape[0]
        if x.shape[1] != self.n or t.shape != (N,) or y.shape != (N,):
            raise ShapeMismatch("points must be x (N, n), t (N,), y (N,)")
        if np.any(y <= 0):
            raise DomainError("modal fields are evaluated at y > 0")
        C = self.components
        out = {k: np.zeros((C, N), dtype=complex)
               for k in ("val", "dt", "lap", "dy", "dyy", "ya_dy")}
        grad = np.zeros((C, self.n, N), dtype=complex)
        cache: dict[int, ProfileValues] = {}
        for term in self.terms:
            key = id(term.profile)
            if key not in cache:
                cache[key] = term.profile(y)
            pv = cache[key]
            e = term.coef * np.exp(1j * (x @ term.q + term.sigma * t))
            c = term.comp
            out["val"][c] += pv.f * e
            out["dt"][c] += 1j * term.sigma * pv.f * e
            grad[c] += 1j * term.q[:, None] * (pv.f * e)[None]
            out["lap"][c] += -(term.q @ term.q) * pv.f * e
            out["dy"][c] += pv.fy * e
            out["dyy"][c] += pv.fyy * e
            out["ya_dy"][c] += pv.ya_fy * e
        return FieldValues(grad=grad, **out)
