import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from lamefrac import reduction as red
from lamefrac.errors import DomainError, PreconditionViolation, ShapeMismatch
from lamefrac.modal import MacdonaldProfile, SeriesProfile
from lamefrac.symbol import LameParams

P = LameParams(1.0, 0.5)
V2 = red.PotentialSpec(2, (0.6, 0.3), ((1.0, 0.0), (0.0, 1.0)), (0.0, 1.0), (0.2, 1.1), 0.25)
K, SIGMA = np.array([1.0, 2.0]), 1.0
AMP = np.array([0.3 + 0.1j, -0.7])


def points(count=40, seed=0, ylo=1e-2, yhi=1.0, n=2):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 2 * math.pi, (count, n))
    t = rng.uniform(0, 2 * math.pi, count)
    y = np.exp(rng.uniform(math.log(ylo), math.log(yhi), count))
    return x, t, y


@st.composite
def potentials(draw, n=2):
    m = draw(st.integers(0, 3))
    amps = tuple(draw(st.floats(-1, 1)) for _ in range(m))
    ks = tuple(tuple(draw(st.floats(-2, 2)) for _ in range(n)) for _ in range(m))
    oms = tuple(draw(st.floats(-2, 2)) for _ in range(m))
    phs = tuple(draw(st.floats(0, 6.3)) for _ in range(m))
    return red.PotentialSpec(n, amps, ks, oms, phs, draw(st.floats(-1, 1)))


# -- potential -----------------------------------------------------------------------

def test_potential_derivatives_by_finite_differences():
    x, t, _ = points(5)
    d = V2.derivatives(x, t)
    h = 1e-5
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (V2.derivatives(x + e, t)["V"] - V2.derivatives(x - e, t)["V"]) / (2 * h)
        assert np.abs(fd - d["Vx"][i]).max() < 1e-9
        fd = (V2.derivatives(x + e, t)["Vxx"][:, i] - V2.derivatives(x - e, t)["Vxx"][:, i]) / (2 * h)
        assert np.abs(fd - d["Vxxx"][:, i]).max() < 1e-8
    fd = (V2.derivatives(x, t + h)["Vx"] - V2.derivatives(x, t - h)["Vx"]) / (2 * h)
    assert np.abs(fd - d["Vxt"]).max() < 1e-9


def test_potential_shape_errors():
    with pytest.raises(ShapeMismatch):
        red.PotentialSpec(2, (1.0,), ((1.0,),), (0.0,), (0.0,))
    with pytest.raises(ShapeMismatch):
        red.PotentialSpec(2, (1.0, 2.0), ((1.0, 0.0),), (0.0,), (0.0,))


def test_c3_bound_dominates_derivatives():
    x, t, _ = points(200)
    d = V2.derivatives(x, t)
    worst = max(np.abs(v).max() for v in d.values())
    assert worst <= V2.c3_bound


@settings(max_examples=30, deadline=None)
@given(potentials())
def test_row_structure_commutes(V):
    x, t, _ = points(20)
    assert red.commutator_check(V, x, t, "row") <= 1e-14 * max(1.0, V.c3_bound**2)


def test_arrow_control_does_not_commute():
    x, t, _ = points(50)
    assert red.commutator_check(V2, x, t, "arrow") > 1e-3
    with pytest.raises(ValueError):
        red.commutator_check(V2, x, t, "diagonal")


def test_transposed_structure_also_commutes():
    # the transpose of a commuting family commutes as well
    x, t, _ = points(50)
    assert red.commutator_check(V2, x, t, "column") < 1e-14


@settings(max_examples=30, deadline=None)
@given(potentials(), st.floats(-5, 5))
def test_exponential_closed_form(V, c):
    x, t, _ = points(10)
    Vt = red.potential_matrix(V, x, t)
    E = red.exp_potential(c, Vt)
    ref = np.stack([linalg.expm(c * M) for M in Vt])
    assert np.abs(E - ref).max() <= 1e-12 * max(1.0, np.abs(ref).max())
    S = red.exp_series(c, Vt)
    assert np.abs(E - S).max() <= 1e-12 * max(1.0, np.abs(E).max())
    inv = E @ red.exp_potential(-c, Vt)
    assert np.abs(inv - np.eye(3)).max() <= 1e-13 * max(1.0, abs(c) * V.c3_bound)


def test_split_potential_nilpotent():
    x, t, _ = points(10)
    v, N = red.split_potential(red.potential_matrix(V2, x, t))
    assert np.all(N @ N == 0)
    np.testing.assert_allclose(v, V2.derivatives(x, t)["V"])


# -- single-mode reduction ---------------------------------------------------------------

def test_modal_extension_matches_profiles():
    x, t, y = points(10)
    u = red.modal_extension(P, K, SIGMA, AMP, 0.4)
    fv = u.evaluate(x, t, y)
    e = np.exp(1j * (x @ K + SIGMA * t))
    par = (K @ AMP) / (K @ K) * K
    prof1 = MacdonaldProfile(complex(P.c1 * 5, SIGMA), 0.4)(y).f
    prof2 = MacdonaldProfile(complex(P.c2 * 5, SIGMA), 0.4)(y).f
    expected = (AMP - par)[:, None] * prof1 * e + par[:, None] * prof2 * e
    assert np.abs(fv.val - expected).max() < 1e-14


def test_assemble_divergence_component():
    x, t, y = points(10)
    U = red.assemble_U(red.modal_extension(P, K, SIGMA, AMP, 0.6)).evaluate(x, t, y)
    div = U.grad[0, 0] + U.grad[1, 1]
    assert np.abs(U.val[2] - div).max() < 1e-13


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
def test_scalar_extension_residual(s):
    y = np.geomspace(1e-3, 3, 50)
    assert red.scalar_extension_residual(s, 5 + 1j, y) < 1e-12


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
def test_shear_scaled_drift_closes_system(s):
    x, t, y = points(80)
    assert red.staru_residual(P, s, K, SIGMA, AMP, x, t, y, drift="consistent") < 1e-10


@pytest.mark.parametrize("s", [0.3, 0.75])
def test_decoupled_lame_has_no_drift(s):
    p = LameParams(1.0, -1.0, 1e-3)
    x, t, y = points(80)
    assert red.drift_coefficient(p) == 0
    assert red.staru_residual(p, s, K, SIGMA, AMP, x, t, y, drift="literal") < 1e-10


def test_literal_drift_leaves_residual():
    # differentiating the rescaled last component picks up the wrong chain-rule
    # factor, so the literal drift does not close the system when lambda != -mu
    x, t, y = points(80)
    lit = red.staru_residual(P, 0.5, K, SIGMA, AMP, x, t, y, drift="literal")
    none = red.staru_residual(P, 0.5, K, SIGMA, AMP, x, t, y, drift="none")
    assert lit > 1e-2 and none > 1e-2


def test_purely_shear_mode_needs_no_drift():
    v = np.array([2.0, -1.0])   # orthogonal to K, so div u~ = 0
    x, t, y = points(40)
    assert red.staru_residual(P, 0.4, K, SIGMA, v, x, t, y, drift="literal") < 1e-10


def test_staru_rejects_bad_input():
    x, t, y = points(5)
    with pytest.raises(DomainError):
        red.staru_residual(P, 0.5, K, SIGMA, AMP, x, t, -y)
    with pytest.raises(ValueError):
        red.staru_residual(P, 0.5, K, SIGMA, AMP, x, t, y, drift="other")


# -- series profiles and the Neumann-coupled field -------------------------------------------

@pytest.mark.parametrize("kind", ["even", "odd"])
@pytest.mark.parametrize("s", [0.5, 0.75])
def test_series_profile_ode(kind, s):
    y = np.geomspace(1e-4, 1.0, 30)
    L2 = 3 + 2j
    pv = SeriesProfile(L2, s, kind)(y)
    a = 1 - 2 * s
    res = pv.fyy + a / y * pv.fy - L2 * pv.f
    assert np.abs(res).max() < 1e-9 * max(1.0, np.abs(pv.fyy).max())
    np.testing.assert_allclose(pv.ya_fy, y**a * pv.fy, rtol=1e-12)


def test_series_profile_l2_derivative():
    s, L2, h = 0.75, 2 + 1j, 1e-6
    y = np.geomspace(1e-3, 1.0, 10)
    fd = (SeriesProfile(L2 + h, s, "odd")(y).f - SeriesProfile(L2 - h, s, "odd")(y).f) / (2 * h)
    np.testing.assert_allclose(SeriesProfile(L2, s, "odd", dL2=True)(y).f, fd, rtol=1e-7, atol=1e-13)


@pytest.mark.parametrize("s", [0.5, 0.75])
def test_coupled_field_solves_system(s):
    x, t, y = points(40)
    g = np.r_[AMP, 1.0]
    U = red.neumann_coupled_field(P, V2, s, K, SIGMA, g)
    assert red.reduced_system_residual(P, U, s, x, t, y) < 1e-10
    r1 = red.neumann_trace_residual(U, V2, s, x, t, 1e-3)
    r2 = red.neumann_trace_residual(U, V2, s, x, t, 1e-5)
    # the weighted trace defect decays like y^(2-2s)
    assert math.log(r1 / r2) / math.log(100) == pytest.approx(2 - 2 * s, abs=0.1)


def test_coupled_field_shape_check():
    with pytest.raises(ShapeMismatch):
        red.neumann_coupled_field(P, V2, 0.5, K, SIGMA, AMP)


# -- W-transform ---------------------------------------------------------------------------

def test_w_transform_derivatives():
    s = 0.75
    U = red.neumann_coupled_field(P, V2, s, K, SIGMA, np.r_[AMP, 1.0])
    x, t, y = points(10, ylo=0.2)
    w = red.w_transform(U, V2, s, x, t, y)
    h = 1e-5
    up = red.w_transform(U, V2, s, x, t, y + h)
    dn = red.w_transform(U, V2, s, x, t, y - h)
    assert np.abs((up.W - dn.W) / (2 * h) - w.Wy).max() < 1e-7
    assert np.abs((up.Wy - dn.Wy) / (2 * h) - w.Wyy).max() < 1e-6
    np.testing.assert_allclose(w.ya_Wy, y ** (1 - 2 * s) * w.Wy, rtol=1e-10, atol=1e-12)
    tp = red.w_transform(U, V2, s, x, t + h, y)
    tm = red.w_transform(U, V2, s, x, t - h, y)
    assert np.abs((tp.W - tm.W) / (2 * h) - w.Wt).max() < 1e-7
    lap = 0
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        xp = red.w_transform(U, V2, s, x + e, t, y)
        xm = red.w_transform(U, V2, s, x - e, t, y)
        assert np.abs((xp.W - xm.W) / (2 * h) - w.Wgrad[:, i]).max() < 1e-7
        lap = lap + (xp.Wgrad[:, i] - xm.Wgrad[:, i]) / (2 * h)
    assert np.abs(lap - w.Wlap).max() < 1e-6


def test_w_transform_zero_potential_is_identity():
    s = 0.6
    Z = red.PotentialSpec.zero(2)
    U = red.neumann_coupled_field(P, Z, s, K, SIGMA, np.r_[AMP, 1.0])
    x, t, y = points(10)
    w = red.w_transform(U, Z, s, x, t, y)
    np.testing.assert_allclose(w.W, U.evaluate(x, t, y).val, rtol=1e-15)


def test_w_neumann_decay_constant_trace():
    s = 0.75
    U = red.neumann_coupled_field(P, V2, s, np.zeros(2), 0.0, np.r_[AMP, 1.0])
    x, t, _ = points(30)
    sup, slope = red.neumann_decay(U, V2, s, x, t, 2.0 ** -np.arange(6, 21))
    assert slope == pytest.approx(2 * s, abs=0.15)
    assert np.all(np.diff(sup) < 0)


def test_w_neumann_decay_at_half():
    s = 0.5
    U = red.neumann_coupled_field(P, V2, s, K, SIGMA, np.r_[AMP, 1.0])
    x, t, _ = points(30)
    _, slope = red.neumann_decay(U, V2, s, x, t, 2.0 ** -np.arange(6, 21))
    assert slope == pytest.approx(1.0, abs=0.15)


def test_weq_ratio_gate_and_value():
    U = red.neumann_coupled_field(P, V2, 0.75, K, SIGMA, np.r_[AMP, 1.0])
    x, t, y = points(20)
    assert np.isfinite(red.weq_ratio(U, V2, 0.75, x, t, y))
    with pytest.raises(PreconditionViolation):
        red.weq_ratio(U, V2, 0.45, x, t, y)
