import numpy as np
import pytest

from prescurv import ambient as am
from prescurv.errors import DomainError, UnsupportedConfiguration

WARPS = [am.Warp.exp_decay, am.Warp.gauss_decay, am.Warp.cosh, lambda: am.Warp.const(2.0)]


def _fd(f, t, h=1e-5):
    return (f(t + h) - f(t - h)) / (2 * h)


def test_warp_derivatives_match_finite_differences():
    t = np.linspace(0.2, 1.8, 9)
    for make in WARPS:
        w = make()
        np.testing.assert_allclose(w.dphi(t), _fd(w.phi, t), rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(w.ddphi(t), _fd(w.dphi, t), rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("make", WARPS)
@pytest.mark.parametrize("psi", [(0.0, 0.0), (0.3, -0.4)])
def test_level_set_eigenvalue_against_fd(make, psi):
    amb = am.WarpedAmbient(2, make(), am.ConformalFactor(*psi), slab=(0.0, 2.0))
    for t in (0.3, 1.0, 1.7):
        hbar, kb = am.level_second_fundamental(amb, t)
        expected = np.exp(-amb.psi(t)) * -(_fd(amb.warp.phi, t) / amb.warp.phi(t) + psi[1])
        assert abs(kb - expected) <= 1e-8
        np.testing.assert_allclose(np.linalg.eigvalsh(hbar / (np.exp(2 * amb.psi(t)) * amb.warp.phi(t) ** 2)), kb, atol=1e-12)


def test_level_curvature_closed_forms():
    exp = am.WarpedAmbient(3, am.Warp.exp_decay(), slab=(0.0, 1.0))
    gauss = am.WarpedAmbient(3, am.Warp.gauss_decay(), slab=(0.0, 3.0))
    t = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(am.kappa_bar(exp, t), 1.0, rtol=1e-14)
    np.testing.assert_allclose(am.kappa_bar(gauss, t), t, rtol=1e-14)


def test_christoffel_cross_check_with_second_fundamental_form():
    amb = am.WarpedAmbient(2, am.Warp.gauss_decay(), am.ConformalFactor(0.1, 0.2), slab=(0.0, 2.0))
    for t in (0.4, 1.3):
        gam = am.christoffels(amb, t).gamma
        hbar, _ = am.level_second_fundamental(amb, t)
        np.testing.assert_allclose(-gam[0, 1:, 1:], np.exp(-amb.psi(t)) * hbar, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(gam, am.christoffels_fd(amb, t).gamma, atol=1e-6)


def test_ricci_of_exponential_warp_is_einstein():
    # phi = e^{-t} gives a space of constant curvature: Ric = n g
    for n in (1, 2, 3):
        amb = am.WarpedAmbient(n, am.Warp.exp_decay(), slab=(0.0, 1.0))
        for t in (0.3, 0.7):
            curv = am.riemann_numeric(amb, t)
            np.testing.assert_allclose(curv.ricci, n * amb.metric(t), atol=1e-7)


def test_ricci_of_gaussian_warp_matches_flrw_formula():
    n = 2
    amb = am.WarpedAmbient(n, am.Warp.gauss_decay(), slab=(0.0, 2.5))
    for t in (0.5, 1.0, 1.5):
        a = np.exp(-t * t / 2)
        add_over_a = t * t - 1
        ric = am.riemann_numeric(amb, t).ricci
        assert ric[0, 0] == pytest.approx(-n * add_over_a, abs=1e-7)
        spatial = a * a * (add_over_a + (n - 1) * t * t)
        np.testing.assert_allclose(ric[1:, 1:], spatial * np.eye(n), atol=1e-7)


def test_riemann_symmetries():
    amb = am.WarpedAmbient(3, am.Warp.cosh(), slab=(0.0, 2.0))
    res = am.riemann_numeric(amb, 1.1).symmetry_residuals()
    assert max(res.values()) <= 1e-8


def test_mean_curvature_identity():
    amb = am.WarpedAmbient(2, am.Warp.gauss_decay(), slab=(0.0, 2.5))
    for t in (0.5, 1.0, 1.5):
        assert am.verify_mean_curvature_identity(amb, t).residual <= 1e-6


def test_mean_curvature_identity_rejects_conformal_factor():
    amb = am.WarpedAmbient(2, am.Warp.gauss_decay(), am.ConformalFactor(0.0, 0.5), slab=(0.0, 2.5))
    with pytest.raises(UnsupportedConfiguration):
        am.verify_mean_curvature_identity(amb, 1.0)


def test_timelike_convergence_sampling():
    # Ric = n g on the exponential warp, so Ric(nu, nu) = -n for the unit slice normal
    bad = am.timelike_convergence_sample(am.WarpedAmbient(2, am.Warp.exp_decay(), slab=(0.0, 1.0)), 0.5)
    assert not bad.holds
    assert bad.min_value == pytest.approx(-2.0, abs=1e-6)
    assert bad.witness is not None
    flat = am.timelike_convergence_sample(am.WarpedAmbient(2, am.Warp.const(1.0), slab=(0.0, 1.0)), 0.5)
    assert flat.holds


def test_convex_chi_verdicts():
    flat = am.WarpedAmbient(2, am.Warp.const(1.0), slab=(0.0, 1.0))
    for lam in (0.01, 1.0, 100.0):
        assert not am.convex_chi(flat, lam=lam).positive_definite
    decay = am.WarpedAmbient(2, am.Warp.exp_decay(), slab=(0.0, 1.0))
    rep = am.convex_chi(decay, lam=10.0)
    assert rep.positive_definite
    assert rep.c0 == pytest.approx(10.0, rel=1e-9)


def test_convex_chi_monotone_in_lambda():
    gauss = am.WarpedAmbient(2, am.Warp.gauss_decay(), slab=(1.0, 2.0))
    verdicts = [am.convex_chi(gauss, lam=lam).positive_definite for lam in (0.001, 0.01, 0.1, 1.0, 10.0)]
    assert verdicts == sorted(verdicts)
    assert not verdicts[1] and verdicts[2]


def test_slab_domain_errors():
    amb = am.WarpedAmbient(2, am.Warp.exp_decay(), slab=(0.0, 1.0))
    with pytest.raises(DomainError):
        amb.metric(1.5)
    with pytest.raises(ValueError):
        am.WarpedAmbient(4, am.Warp.exp_decay())
    with pytest.raises(ValueError):
        am.WarpedAmbient(2, am.Warp.exp_decay(), slab=(1.0, 0.0))


def test_spline_warp_tracks_exponential():
    knots = np.linspace(0.0, 1.0, 41)
    amb = am.WarpedAmbient(2, am.Warp.spline(knots, np.exp(-knots)), slab=(0.0, 1.0))
    np.testing.assert_allclose(am.kappa_bar(amb, np.array([0.25, 0.5, 0.75])), 1.0, atol=1e-4)


def test_describe_round_trip():
    amb = am.WarpedAmbient(3, am.Warp.cosh(), am.ConformalFactor(0.1, 0.2), slab=(0.0, 2.0))
    again = am.ambient_from_spec(amb.describe())
    assert again.describe() == amb.describe()
    np.testing.assert_array_equal(again.metric(1.0), amb.metric(1.0))
