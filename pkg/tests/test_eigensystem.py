import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccmt.eigensystem import (
    ReferenceParams,
    dispersion_residuals,
    eigenfunction_table,
    eigenfunction_x_derivatives,
    eigenvalue_H_derivatives,
    eval_eigenfunction,
    l2_norm_and_gamma,
    make_station,
    solve_dispersion,
)
from ccmt.expansion import gauss_nodes
from ccmt.geometry import build_flat

# Roots computed independently with mpmath at 40 digits (bisection for k1,
# bracketed secant for the rest) and frozen here.
K1_TANH1_H1 = 2.883355658589349339612980
K_MU05_H07 = [0.8977329348316932221136517, 4.323510501809623581535453, 8.895768406657377306128643, 13.41073092331954764814162]


def test_k0_is_kappa_at_reference_depth(params):
    eig = solve_dispersion(params, 1.0, 0)
    assert abs(eig.k0 - 1.0) < 1e-14


def test_k1_matches_bisection_oracle(params):
    eig = solve_dispersion(params, 1.0, 1)
    assert abs(eig.k[1] - K1_TANH1_H1) < 1e-13
    assert np.pi / 2 < eig.k[1] < np.pi


def test_roots_match_frozen_values():
    eig = solve_dispersion(ReferenceParams(0.5, 1.0), 0.7, 3)
    np.testing.assert_allclose(eig.k, K_MU05_H07, rtol=1e-14)


def test_mu0_zero_rejected():
    with pytest.raises(ValueError):
        ReferenceParams(0.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(mu=st.floats(1e-3, 20.0), H=st.floats(0.05, 20.0))
def test_roots_bracketed_and_accurate(mu, H):
    p = ReferenceParams(mu, 1.0)
    eig = solve_dispersion(p, H, 70)
    n = np.arange(1, 71)
    theta = eig.kn * H
    assert np.all(theta > (n - 0.5) * np.pi) and np.all(theta < n * np.pi)
    res = dispersion_residuals(p, eig)
    assert abs(res[0]) <= 1e-12 * max(1.0, mu)
    assert np.all(np.abs(res[1:]) <= 1e-10 * eig.kn)


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(0.05, 5.0), H=st.floats(0.2, 5.0))
def test_H_derivatives_match_differences(mu, H):
    p = ReferenceParams(mu, 1.0)
    d = 1e-6
    k = solve_dispersion(p, H, 20).k
    kp = solve_dispersion(p, H + d, 20).k
    km = solve_dispersion(p, H - d, 20).k
    prop = eigenvalue_H_derivatives(p, H, k[:1], "propagating")
    evan = eigenvalue_H_derivatives(p, H, k[1:], "evanescent")
    dk = np.concatenate([prop.dH_k, evan.dH_k])
    fd = (kp - km) / (2 * d)
    np.testing.assert_allclose(dk, fd, rtol=1e-5, atol=1e-9)
    # second derivative: difference the closed-form first derivative
    dkp = np.concatenate([eigenvalue_H_derivatives(p, H + d, kp[:1], "propagating").dH_k,
                          eigenvalue_H_derivatives(p, H + d, kp[1:], "evanescent").dH_k])
    dkm = np.concatenate([eigenvalue_H_derivatives(p, H - d, km[:1], "propagating").dH_k,
                          eigenvalue_H_derivatives(p, H - d, km[1:], "evanescent").dH_k])
    d2 = np.concatenate([prop.d2H_k, evan.d2H_k])
    np.testing.assert_allclose(d2, (dkp - dkm) / (2 * d), rtol=1e-5, atol=1e-8)
    # the cancellation-free (kH)' forms agree with the direct ones
    kH_H = np.concatenate([prop.kH_H, evan.kH_H])
    np.testing.assert_allclose(kH_H, H * dk + k, rtol=1e-9, atol=1e-12)


def test_unknown_branch(params):
    with pytest.raises(ValueError):
        eigenvalue_H_derivatives(params, 1.0, [1.0], "sideways")


def test_x_derivatives_match_neighbouring_stations(smooth05, params):
    d = 1e-6
    for x in np.linspace(0.1, 6.0, 7):
        st0 = make_station(smooth05, params, x, 20)
        kp = make_station(smooth05, params, x + d, 20).eig.k
        km = make_station(smooth05, params, x - d, 20).eig.k
        scale = np.maximum(np.abs(st0.deriv.dx_k), 1e-3 * st0.eig.k)
        assert np.all(np.abs(st0.deriv.dx_k - (kp - km) / (2 * d)) <= 1e-5 * scale)


def test_eigenfunctions_boundary_conditions(smooth05, params):
    st0 = make_station(smooth05, params, 0.8, 30)
    z = np.array([-st0.h, st0.eta])
    for n in range(31):
        Z, W, dz = eval_eigenfunction(n, z, st0)
        assert abs(Z[1] - 1.0) < 1e-12
        assert abs(dz[1] - params.mu0 * Z[1]) < 1e-9 * max(1.0, st0.eig.k[n])
        assert abs(dz[0]) < 1e-10 * max(1.0, st0.eig.k[n])


def test_orthogonality_and_norms(rough09, params):
    st0 = make_station(rough09, params, 2.0, 25)
    z, w = gauss_nodes(-st0.h, st0.eta, 200)
    Z, _ = eigenfunction_table(st0, z)
    G = (Z * w) @ Z.T
    norm_sq, gamma = l2_norm_and_gamma(np.arange(26), st0)
    np.testing.assert_allclose(np.diag(G), norm_sq, rtol=1e-12)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-12
    np.testing.assert_allclose(gamma * norm_sq, 1.0)


def test_propagating_mode_stable_for_deep_strip():
    p = ReferenceParams(1.0, 1.0)
    eig = solve_dispersion(p, 800.0, 2)
    assert abs(eig.k0 - 1.0) < 1e-12

    st0 = make_station(build_flat(800.0), ReferenceParams(1.0, 800.0), 0.0, 2)
    Z, W = eigenfunction_table(st0, np.array([-800.0, -400.0, 0.0]), [0])
    assert np.all(np.isfinite(Z)) and abs(Z[0, -1] - 1.0) < 1e-14
    assert 0.0 <= Z[0, 0] < 1e-300


@pytest.mark.parametrize("geom", ["smooth05", "undulated"])
def test_Z_x_derivatives_match_differences(geom, params, request):
    geometry = request.getfixturevalue(geom)
    d = 1e-6
    for x in np.linspace(0.2, 6.0, 5):
        stc = make_station(geometry, params, x, 20)
        # fixed interior z so that neighbouring stations still contain it
        z = -stc.h + stc.H * np.linspace(0.05, 0.95, 41)
        Z, W = eigenfunction_table(stc, z)
        dxZ, dx2Z, dxW = eigenfunction_x_derivatives(stc, z, Z, W)
        plus, minus = make_station(geometry, params, x + d, 20), make_station(geometry, params, x - d, 20)
        Zp, Wp = eigenfunction_table(plus, z)
        Zm, Wm = eigenfunction_table(minus, z)
        fdZ = (Zp - Zm) / (2 * d)
        fdW = (Wp - Wm) / (2 * d)
        dxZp, _, _ = eigenfunction_x_derivatives(plus, z, Zp, Wp)
        dxZm, _, _ = eigenfunction_x_derivatives(minus, z, Zm, Wm)
        fd2 = (dxZp - dxZm) / (2 * d)
        for got, ref in ((dxZ, fdZ), (dxW, fdW), (dx2Z, fd2)):
            scale = np.abs(ref).max(axis=1, keepdims=True) + 1e-12
            assert np.all(np.abs(got - ref) <= 1e-5 * scale)


@pytest.mark.parametrize("c", [0.05, 0.99, 3.0])
def test_newton_converges_quadratically(c, monkeypatch):
    import ccmt.eigensystem as es

    calls = []
    real = es._bracketed_newton

    def counting(func, lo, hi, guess, what):
        def f(x):
            calls.append(what)
            return func(x)

        return real(f, lo, hi, guess, what)

    monkeypatch.setattr(es, "_bracketed_newton", counting)
    solve_dispersion(ReferenceParams(c, 1.0), 1.0, 70)
    assert calls.count("propagating root") <= 10
    assert calls.count("evanescent root") <= 10
