import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccmt.basis import basis_table, boundary_operators, eval_basis, eval_boundary_mode, surface_gradient_traces
from ccmt.eigensystem import ReferenceParams, make_station
from ccmt.geometry import CosineProfile, build_custom_profile


def test_boundary_mode_formulas(smooth05, params):
    x = 1.3
    eta = smooth05.eta(x)[0]
    z = np.linspace(-1.0, float(eta), 9)
    mu, h0 = params.mu0, 1.0
    H = eta + 1.0
    s = z + 1.0
    a = (mu * h0 + 1) / (2 * h0)
    b = (mu * h0 - 1) / (2 * h0)
    np.testing.assert_allclose(eval_boundary_mode(-2, z, smooth05, params, x).value, a * s**2 / H - a * H + 1, rtol=1e-14)
    np.testing.assert_allclose(eval_boundary_mode(-1, z, smooth05, params, x).value, b * s**2 / H + s / h0 - a * H + 1, rtol=1e-14)


def test_boundary_mode_index_checked(smooth05, params):
    with pytest.raises(ValueError):
        eval_boundary_mode(0, [0.0], smooth05, params, 0.0)


@settings(max_examples=50, deadline=None)
@given(
    eps=st.floats(0.0, 0.6),
    bot=st.floats(0.0, 0.3),
    mu=st.floats(0.05, 4.0),
    h0=st.floats(0.5, 2.0),
    x=st.floats(0.0, 2 * np.pi),
)
def test_boundary_mode_conditions(eps, bot, mu, h0, x):
    g = build_custom_profile(CosineProfile(eps * h0, 1.0), CosineProfile(bot * h0, 2.0, offset=h0), h0)
    p = ReferenceParams(mu, h0)
    stn = make_station(g, p, x, 3)
    T = basis_table(stn, [-stn.h, stn.eta])
    top, bottom = boundary_operators(T, stn)
    tol = 1e-10 * max(1.0, mu, 1 / h0)
    np.testing.assert_allclose(T.value[:, -1], 1.0, atol=1e-10)
    assert abs(top[0] - 1.0 / h0) < tol and abs(top[1]) < tol
    assert abs(bottom[0]) < tol and abs(bottom[1] - 1.0 / h0) < tol
    assert np.all(np.abs(top[2:]) < tol * 10)
    assert np.all(np.abs(bottom[2:]) < 1e-9 * np.maximum(1.0, stn.eig.k))


@pytest.mark.parametrize("geom", ["undulated", "rough09"])
def test_basis_x_derivatives_match_differences(geom, params, request):
    g = request.getfixturevalue(geom)
    d = 1e-6
    for x in (0.4, 2.2, 4.9):
        c = make_station(g, params, x, 20)
        z = -c.h + c.H * np.linspace(0.05, 0.95, 31)
        T = basis_table(c, z)
        Tp = basis_table(make_station(g, params, x + d, 20), z)
        Tm = basis_table(make_station(g, params, x - d, 20), z)
        for got, ref in ((T.dx, (Tp.value - Tm.value) / (2 * d)), (T.dx2, (Tp.dx - Tm.dx) / (2 * d))):
            scale = np.abs(ref).max(axis=1, keepdims=True) + 1e-12
            assert np.all(np.abs(got - ref) <= 1e-5 * scale)


def test_basis_z_derivatives_match_differences(undulated, params):
    c = make_station(undulated, params, 1.0, 10)
    z = -c.h + c.H * np.linspace(0.1, 0.9, 9)
    d = 1e-6
    T = basis_table(c, z)
    Tp, Tm = basis_table(c, z + d), basis_table(c, z - d)
    np.testing.assert_allclose(T.dz, (Tp.value - Tm.value) / (2 * d), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(T.dz2, (Tp.dz - Tm.dz) / (2 * d), rtol=1e-5, atol=1e-4)


def test_surface_traces_mode5(smooth05, params):
    x = 0.9
    c = make_station(smooth05, params, x, 5)
    e = eval_basis(5, [c.eta], c)
    dx, dz = surface_gradient_traces(5, smooth05, params, x)
    eta_x = smooth05.eta(x)[1]
    assert abs(dx - (-params.mu0 * eta_x)) < 1e-15 and abs(dz - params.mu0) < 1e-15
    assert abs(e.dx[0] - dx) < 1e-10 and abs(e.dz[0] - dz) < 1e-10


def test_surface_traces_all_modes(undulated, params):
    x = np.linspace(0, 6, 5)
    n = np.arange(-2, 12)[:, None]
    dx, dz = surface_gradient_traces(n, undulated, params, x[None, :])
    for j, xj in enumerate(x):
        c = make_station(undulated, params, xj, 11)
        T = basis_table(c, [c.eta])
        np.testing.assert_allclose(T.dx[:, 0], dx[:, j], atol=1e-9)
        np.testing.assert_allclose(T.dz[:, 0], dz[:, j], atol=1e-9)


def test_eval_basis_agrees_with_table(rough09, params):
    c = make_station(rough09, params, 3.0, 6)
    z = np.linspace(-c.h, c.eta, 7)
    T = basis_table(c, z)
    for n in range(-2, 7):
        e = eval_basis(n, z, c)
        np.testing.assert_array_equal(e.value, T.row(n).value)
        np.testing.assert_allclose(e.dx2, T.row(n).dx2, rtol=1e-14, atol=1e-14)
    with pytest.raises(ValueError):
        eval_basis(7, z, c)
    with pytest.raises(ValueError):
        eval_basis(0, [c.eta + 0.1], c)
