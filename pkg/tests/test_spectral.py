import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from curvata.acceptance import BALL_CASES
from curvata.errors import InvalidInput
from curvata.spaceform import SpaceForm
from curvata.spectral import (RadialFunction, SturmLiouvilleProblem, ball_robin_spectrum,
                              discretize, harmonic_multiplicity, merge_eigenvalues,
                              radial_eigen, radial_grid, resolvent_minus_one,
                              resolvent_profile, sphere_area, sphere_mode_eigenvalue,
                              sturm_count, tube_mode_eigenvalue)


def ground(n, c, rho0, l, N):
    p = SturmLiouvilleProblem.ball_robin(n, c, rho0, l)
    return float(radial_eigen(p, 1, N, vectors=False).eigenvalues[0])


def test_bessel_calibration():
    # radial Laplacian on the flat disk of radius pi with a Dirichlet edge
    p = SturmLiouvilleProblem(2, 0.0, 0, math.pi, "dirichlet", shift=0.0)
    ref = (scipy.special.jn_zeros(0, 1)[0] / math.pi) ** 2
    lam = radial_eigen(p, 1, 1024, vectors=False).eigenvalues[0]
    assert lam == pytest.approx(ref, rel=1e-5)


def test_bessel_higher_mode_and_angular():
    p = SturmLiouvilleProblem(2, 0.0, 1, 1.0, "dirichlet", shift=0.0)
    refs = scipy.special.jn_zeros(1, 3) ** 2
    lam = radial_eigen(p, 3, 2048, vectors=False).eigenvalues
    np.testing.assert_allclose(lam, refs, rtol=1e-4)


def test_flat_disk_l1_robin_mode_is_linear():
    spec = radial_eigen(SturmLiouvilleProblem(2, 0.0, 1, 1.0, "robin", 1.0), 1, 1024)
    assert abs(spec.eigenvalues[0]) < 50 / 1024**2
    f = spec.eigenfunctions[0]
    np.testing.assert_allclose(f.values / f.values[-1], f.grid, atol=1e-5)


@pytest.mark.parametrize("n,c,rho0", BALL_CASES)
def test_second_order_convergence(n, c, rho0):
    for l in (0, 2):
        v = [ground(n, c, rho0, l, N) for N in (256, 512, 1024)]
        order = math.log2((v[0] - v[1]) / (v[1] - v[2]))
        assert 1.7 <= order <= 2.3


@pytest.mark.parametrize("n,c,rho0", [case for case in BALL_CASES if case[1] == 0.0])
def test_l1_mode_tends_to_zero(n, c, rho0):
    for N in (128, 512, 2048):
        assert abs(ground(n, c, rho0, 1, N)) < 50 / N**2


@pytest.mark.parametrize("n,c,rho0", BALL_CASES)
def test_l1_mode_shrinks_under_refinement(n, c, rho0):
    coarse, fine = abs(ground(n, c, rho0, 1, 256)), abs(ground(n, c, rho0, 1, 1024))
    assert fine < coarse / 10 or fine < 1e-12


@pytest.mark.parametrize("n,c,rho0", [(2, 0.0, 1.0), (3, -1.0, 0.5), (4, 1.0, 1.0)])
def test_eigenfunctions_orthonormal_and_signed(n, c, rho0):
    p = SturmLiouvilleProblem.ball_robin(n, c, rho0, 0)
    spec = radial_eigen(p, 5, 1024)
    disc = discretize(p, 1024)
    G = np.array([[np.sum(disc.masses * f.values * g.values) for g in spec.eigenfunctions]
                  for f in spec.eigenfunctions])
    np.testing.assert_allclose(G, np.eye(5), atol=1e-8)
    for f, lam in zip(spec.eigenfunctions, spec.eigenvalues):
        assert f.values[0] > 0
        # weak residual of (K - lam M) f relative to |f|
        res = disc.apply(f.values) - lam * disc.masses * f.values
        assert np.linalg.norm(res / np.sqrt(disc.masses)) < 1e-8 * max(1.0, abs(lam))
    assert np.all(np.diff(spec.eigenvalues) > 0)


@pytest.mark.parametrize("n,c,rho0", [(2, 0.0, 1.0), (3, 1.0, 0.5), (4, -1.0, 1.0)])
def test_ball_spectrum_second_eigenvalue_zero_with_multiplicity_n(n, c, rho0):
    spec = ball_robin_spectrum(n, c, rho0, 3, 2, 2048)
    assert spec.eigenvalues[0] < 0
    assert abs(spec.eigenvalues[1]) < 50 / 2048**2
    assert spec.multiplicities[1] == n
    assert spec.modes[1] == ((1, 1),)
    firsts = {}
    for l, k, value, mult in spec.table:
        if k == 1:
            firsts[l] = value
    assert all(firsts[l] < firsts[l + 1] for l in range(3))


def test_harmonic_multiplicity():
    for n in range(3, 8):
        for l in range(0, 7):
            ref = math.comb(n - 1 + l - 1, l) * (n - 2 + 2 * l) / (n - 2 + l)
            assert harmonic_multiplicity(n, l) == round(ref)
    assert [harmonic_multiplicity(2, l) for l in range(4)] == [1, 2, 2, 2]
    assert harmonic_multiplicity(3, 1) == 3
    with pytest.raises(InvalidInput):
        harmonic_multiplicity(1, 0)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2)


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30), st.data())
def test_sturm_count_matches_dense_solver(diag, data):
    off = data.draw(st.lists(st.floats(-3, 3), min_size=len(diag) - 1, max_size=len(diag) - 1))
    x = data.draw(st.floats(-8, 8))
    diag, off = np.array(diag), np.array(off)
    T = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    vals = np.linalg.eigvalsh(T)
    assume_gap = np.min(np.abs(vals - x)) > 1e-9
    if assume_gap:
        assert sturm_count(diag, off, x) == int(np.sum(vals < x))


def test_merge_eigenvalues():
    vals, mults, labels = merge_eigenvalues([(1.0, 1, "a"), (-2.0, 1, "b"),
                                             (1.0 + 5e-8, 3, "c"), (4.0, 2, "d")])
    np.testing.assert_allclose(vals, [-2.0, 1.0, 4.0])
    assert list(mults) == [1, 4, 2]
    assert labels[1] == ("a", "c")


def test_sphere_mode_examples():
    sf = SpaceForm(0.0)
    assert sphere_mode_eigenvalue(3, 0, sf, 1.0, 0) == pytest.approx(-2.0)
    assert sphere_mode_eigenvalue(3, 1, sf, 1.0, 0) == pytest.approx(-2.0)
    # first nontrivial band of the round 2-sphere: j(j+1) - 2 = 0
    assert sphere_mode_eigenvalue(3, 0, sf, 1.0, 1) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InvalidInput):
        sphere_mode_eigenvalue(3, 2, sf, 1.0, 0)
    with pytest.raises(InvalidInput):
        sphere_mode_eigenvalue(3, 0, SpaceForm(1.0), 4.0, 0)


@given(st.integers(2, 7), st.data(), st.floats(-2, 2), st.floats(0.05, 0.45))
def test_sphere_mode_monotone_in_j(n, data, c, u):
    r = data.draw(st.integers(0, n - 2))
    R = u * (min(math.pi / math.sqrt(c), 8.0) if c > 0 else 8.0)
    sf = SpaceForm(c)
    vals = [sphere_mode_eigenvalue(n, r, sf, R, j) for j in range(5)]
    if n - 1 - r > 0 and sf.cot(R) ** r > 0:
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_tube_mode_examples():
    sf = SpaceForm(0.0)
    base = sphere_mode_eigenvalue(3, 0, sf, 1.0, 0)
    assert tube_mode_eigenvalue(3, 0, sf, 1.0, 2.0, 0, 0) == base
    # r = 1 is the threshold case: -2 + 2 pi^2 / l^2 with l = pi
    assert tube_mode_eigenvalue(3, 1, sf, 1.0, math.pi, 0, 1) == pytest.approx(0.0, abs=1e-14)
    # r = 0 carries S_0 = 1 in front of the axial term
    assert tube_mode_eigenvalue(3, 0, sf, 1.0, math.pi, 0, 1) == pytest.approx(-1.0)
    vals = [tube_mode_eigenvalue(4, 1, SpaceForm(-0.5), 0.9, 2.5, 0, m) for m in range(1, 6)]
    assert int(np.argmin(vals)) == 0
    with pytest.raises(InvalidInput):
        tube_mode_eigenvalue(3, 0, sf, 1.0, 0.0, 0, 1)
    with pytest.raises(InvalidInput):
        tube_mode_eigenvalue(3, 0, sf, 1.0, 1.0, 0, -1)


def test_resolvent_flat_closed_form():
    rho0, n = 0.8, 3
    res = resolvent_minus_one(n, SpaceForm(0.0), rho0, 512)
    x = res.f.grid
    np.testing.assert_allclose(res.f.values, -(x**2 + rho0**2) / (2 * n), rtol=1e-14)


@pytest.mark.parametrize("n,c,rho0", BALL_CASES)
def test_resolvent_residuals_and_integral(n, c, rho0):
    sf = SpaceForm(c)
    res = resolvent_minus_one(n, sf, rho0, 4096)
    assert res.interior_residual < 1e-6
    assert res.boundary_residual < 1e-8
    assert np.all(res.f.values <= 0)
    if c != 0:
        x = res.f.grid
        direct = (sf.cn(rho0) * sf.cn(x) - 1) / (n * c)
        np.testing.assert_allclose(res.f.values, direct, rtol=1e-10, atol=1e-14)
    ref, _ = scipy.integrate.quad(
        lambda t: resolvent_profile(n, sf, rho0, t) * sf.sn(t) ** (n - 1), 0, rho0,
        epsabs=1e-14, epsrel=1e-13)
    assert res.integral == pytest.approx(ref * sphere_area(n - 1), rel=1e-12)


def test_input_validation():
    with pytest.raises(InvalidInput):
        SturmLiouvilleProblem(3, 1.0, 0, math.pi)
    with pytest.raises(InvalidInput):
        SturmLiouvilleProblem(3, 0.0, -1, 1.0)
    with pytest.raises(InvalidInput):
        SturmLiouvilleProblem(3, 0.0, 0, 1.0, "neumann")
    with pytest.raises(InvalidInput):
        SturmLiouvilleProblem(3, 0.0, 0, 1.0, "robin", float("inf"))
    with pytest.raises(InvalidInput):
        discretize(SturmLiouvilleProblem(3, 0.0, 0, 1.0), 32)
    with pytest.raises(InvalidInput):
        radial_eigen(SturmLiouvilleProblem(3, 0.0, 0, 1.0), 0, 128)
    with pytest.raises(InvalidInput):
        RadialFunction(np.array([0.1, 0.2, 0.4]), np.zeros(3))
    with pytest.raises(InvalidInput):
        RadialFunction(np.array([0.0, 0.1]), np.zeros(2))
    with pytest.raises(InvalidInput):
        ball_robin_spectrum(3, 0.0, 1.0, 1, 2, 128)


def test_grid_layout():
    g = radial_grid(1.0, 100)
    h = 1.0 / 99.5
    assert g[0] == pytest.approx(h / 2)
    assert g[-1] == 1.0
    np.testing.assert_allclose(np.diff(g), h)
    p = SturmLiouvilleProblem(3, 0.0, 0, 1.0, "dirichlet")
    d = discretize(p, 100)
    # cell volumes integrate the weight exactly
    assert d.masses.sum() == pytest.approx(1.0 / 3.0, rel=1e-13)
    assert d.symmetric()[0].size == 99
