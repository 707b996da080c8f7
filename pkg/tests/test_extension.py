import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamefrac.errors import DegenerateInput, DomainError, InvalidExponent
from lamefrac.extension import (asymptotic_energy_integral, default_ladder,
                                dirichlet_trace_error, energy_integrals, extend,
                                extension_dy_multiplier, extension_multiplier,
                                extension_multiplier_quadrature, fit_loglog_slope,
                                neumann_constant, neumann_trace_error, poisson_kernel_residual,
                                profile, profile_dy, profile_dyy, profile_rows)
from lamefrac.grid import SpaceTimeGrid, VectorField, band_limited_random
from lamefrac.symbol import FreqPoint, LameParams, frac_power

P = LameParams(1.0, 0.5)
GRID = SpaceTimeGrid(2, (8, 8), 8, (2 * math.pi,) * 2, 2 * math.pi)

exps = st.floats(0.05, 0.95)
L2s = st.builds(complex, st.floats(0.01, 30), st.floats(-30, 30))
heights = st.floats(1e-3, 5.0)


def sample_field(seed=11, grid=GRID):
    return band_limited_random(grid, grid.n, np.random.default_rng(seed), kmax=1, mmax=1)


def test_frozen_multiplier():
    # 30-digit reference: arbitrary-precision quadrature of the heat-kernel
    # integral along a contour rotated by -pi/4
    ref = 0.444467929222167883212207166286 - 0.272251571130065295619242877827j
    f = FreqPoint([0.0], 1.0)
    got = extension_multiplier(P, f, 0.7, 0.4)[0, 0]
    assert abs(got - ref) <= 1e-13
    quad = extension_multiplier_quadrature(P, f, 0.7, 0.4)[0, 0]
    assert abs(quad - ref) <= 1e-8


def test_neumann_constant():
    assert neumann_constant(0.5) == 1.0
    assert neumann_constant(0.25) == pytest.approx(
        2 ** -0.5 * math.gamma(0.25) / math.gamma(0.75), rel=1e-14)


def test_ladder():
    y = default_ladder()
    assert y.size == 21 and y[0] == 1.0 and y[-1] == 2.0**-20
    assert np.all(np.diff(y) < 0)


def test_profile_limits():
    assert profile(0.0, 0.3, 0.4) == 1.0
    assert profile_dy(0.0, 0.3, 0.4) == 0.0
    # phi -> 1 as y -> 0 and decays at large y
    assert abs(profile(1 + 1j, 1e-9, 0.6) - 1) < 1e-9
    assert abs(profile(1 + 1j, 40.0, 0.6)) < 1e-15


@settings(max_examples=40)
@given(L2s, heights, exps)
def test_profile_derivatives(L2, y, s):
    r = 1 + abs(L2) ** 0.5 * y
    h = 1e-4 * y / r
    fd1 = (profile(L2, y + h, s) - profile(L2, y - h, s)) / (2 * h)
    d1 = profile_dy(L2, y, s)
    # truncation ~ h^2 |phi'''| plus round-off ~ eps |phi| / h
    assert abs(fd1 - d1) <= 1e-6 * abs(d1) + 1e-11 * r * abs(profile(L2, y, s)) / y
    fd2 = (profile_dy(L2, y + h, s) - profile_dy(L2, y - h, s)) / (2 * h)
    d2 = profile_dyy(L2, y, s)
    assert abs(fd2 - d2) <= 1e-6 * abs(d2) + 1e-11 * r * abs(d1) / y


@settings(max_examples=40)
@given(L2s, heights, exps)
def test_profile_ode(L2, y, s):
    a = 1 - 2 * s
    f, f1, f2 = profile(L2, y, s), profile_dy(L2, y, s), profile_dyy(L2, y, s)
    res = f2 + a / y * f1 - L2 * f
    assert abs(res) <= 1e-10 * (abs(f2) + abs(a / y * f1) + abs(L2 * f) + 1e-300)


@settings(max_examples=30)
@given(L2s, exps)
def test_neumann_limit_per_mode(L2, s):
    y = 1e-7
    lhs = neumann_constant(s) * y ** (1 - 2 * s) * profile_dy(L2, y, s)
    target = -(complex(L2) ** s)
    assert abs(lhs - target) <= 2e-3 * abs(target) + 10 * y ** min(2 * s, 2 - 2 * s) * abs(L2)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=3), st.floats(-2, 2),
       st.floats(0.05, 2.0), st.floats(0.1, 0.9))
def test_quadrature_route_agrees(xi, sigma, y, s):
    f = FreqPoint(np.array(xi), sigma)
    if f.xi2 == 0 and sigma == 0:
        return
    closed = extension_multiplier(P, f, y, s)
    quad = extension_multiplier_quadrature(P, f, y, s)
    assert np.abs(closed - quad).max() <= 1e-8 * max(np.abs(closed).max(), 1e-300)


def test_dy_multiplier_is_derivative():
    f = FreqPoint([0.6, -0.8], 0.5)
    h = 1e-6
    fd = (extension_multiplier(P, f, 0.5 + h, 0.3) - extension_multiplier(P, f, 0.5 - h, 0.3)) / (2 * h)
    assert np.abs(fd - extension_dy_multiplier(P, f, 0.5, 0.3)).max() < 1e-8


def test_domain_errors():
    f = FreqPoint([1.0], 0.0)
    with pytest.raises(InvalidExponent):
        extension_multiplier(P, f, 0.5, 1.0)
    with pytest.raises(DomainError):
        extension_multiplier(P, f, 0.0, 0.5)
    zero = VectorField(GRID, np.zeros((2,) + GRID.shape))
    with pytest.raises(DegenerateInput):
        dirichlet_trace_error(P, zero, 0.5, 0.1)


def test_extend_matches_single_frequency_multiplier():
    u = sample_field()
    prof = extend(P, u, 0.4, [0.5, 0.25])
    xi, sigma = GRID.frequency_mesh()
    idx = (1, 7, 1)   # k = (1, -1), m = 1
    f = FreqPoint(xi[(slice(None),) + idx], sigma[idx])
    M = extension_multiplier(P, f, 0.25, 0.4)
    v = prof.boundary.modes[(slice(None),) + idx]
    got = prof.values[(1, slice(None)) + idx]
    assert np.abs(got - M @ v).max() < 1e-14 * max(1, np.abs(v).max()) * 10


def test_extend_preserves_reality():
    u = sample_field()
    prof = extend(P, u, 0.6, [0.3])
    back = np.fft.ifftn(prof.values[0], axes=(1, 2, 3), norm="ortho")
    assert np.abs(back.imag).max() < 1e-13


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
def test_dirichlet_rate(s):
    u = sample_field()
    y = default_ladder()[6:]
    err = dirichlet_trace_error(P, u, s, y)
    assert np.all(np.diff(err) < 0)
    assert fit_loglog_slope(y, err) == pytest.approx(2 * s, abs=0.05)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
def test_neumann_rate(s):
    u = sample_field()
    y = default_ladder()[6:]
    err = neumann_trace_error(P, u, s, y)
    expected = 2 - 2 * s
    assert fit_loglog_slope(y, err) == pytest.approx(expected, abs=0.05)


def test_poisson_kernel():
    pts = [(0.3, 0.2), (1.0, 1.0), (0.05, 0.5)]
    xis = [[0.3, 0.4], [1.0, -1.0], [0.0, 2.0]]
    for s in (0.3, 0.5, 0.75):
        assert poisson_kernel_residual(P, s, pts, xis) < 1e-5
    with pytest.raises(DomainError):
        poisson_kernel_residual(P, 0.5, [(0.0, 1.0)])


def test_asymptotic_energy_scale_free():
    for s in (0.3, 0.75):
        base = asymptotic_energy_integral(s, 1.0)
        assert asymptotic_energy_integral(s, 3.0) == pytest.approx(base, rel=1e-10)
        rot = asymptotic_energy_integral(s, 2 * np.exp(0.4j))
        assert rot == pytest.approx(asymptotic_energy_integral(s, np.exp(0.4j)), rel=1e-10)


def test_energy_single_mode_closed_form():
    # single sigma-only mode: bulk_l2 over [0, M] against direct quadrature
    grid = SpaceTimeGrid(1, (4,), 4, (2 * math.pi,), 2 * math.pi)
    x, t = grid.mesh()
    u = VectorField(grid, np.cos(t)[None])
    s, M = 0.4, 0.5
    rep = energy_integrals(P, u, s, M)
    from scipy import integrate
    a = 1 - 2 * s
    f = lambda y: y**a * abs(profile(1j, y, s)) ** 2
    ref = integrate.quad(f, 0, M, epsabs=0, epsrel=1e-12)[0] * np.sum(u.samples**2)
    assert rep.bulk_l2 == pytest.approx(ref, rel=1e-9)
    assert rep.bulk_grad <= rep.grad_bound


def test_profile_rows_shape():
    u = sample_field()
    rows = list(profile_rows(P, u, 0.5, [0.5, 0.25]))
    assert rows and all(len(r) == GRID.n + 1 + 5 for r in rows)
    assert all(isinstance(v, (int, np.integer)) for v in rows[0][:GRID.n + 1])


def test_multiplier_trace_is_frac_power():
    f = FreqPoint([1.0, 0.5], -0.7)
    s = 0.35
    y = 1e-7
    lhs = neumann_constant(s) * y ** (1 - 2 * s) * extension_dy_multiplier(P, f, y, s)
    assert np.abs(lhs + frac_power(P, f, s)).max() < 1e-3
