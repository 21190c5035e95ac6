import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

import oracles
from thinspace.curvature import (
    Integrand,
    ball_integral,
    capped_cylinder,
    flat,
    paraboloid,
    product_sphere_flat,
    r_k,
    ricci_eigenvalues,
    sphere,
    tangent_hypothesis_scan,
)
from thinspace.curvature.integrals import scan_trend
from thinspace.curvature.l14 import EigenSample, _frames, _spectra, l14_search, l14_sides, l14_verify
from thinspace.curvature.manifolds import (
    ball_volume,
    from_name,
    paraboloid_K,
    paraboloid_area,
    paraboloid_arclength,
    paraboloid_rho_at,
)
from thinspace.curvature.quadrature import adaptive_simpson
from thinspace.curvature.vitali import covers_bad_cells, fifth_balls_disjoint, scale_pick_cover
from thinspace.errors import BadExponent, BadK, BadParameters, InputError, OutOfChart, UnsupportedBase


# -- eigenvalues ------------------------------------------------------------------

def test_ricci_eigenvalues_closed_forms():
    assert np.allclose(ricci_eigenvalues(sphere(3, 2.0)), [0.5, 0.5, 0.5])
    assert np.allclose(ricci_eigenvalues(flat(4)), 0)
    assert np.allclose(ricci_eigenvalues(product_sphere_flat(2.0, 1)), [0, 0.25, 0.25])
    assert np.allclose(ricci_eigenvalues(paraboloid(), (0, 0)), [4, 4])
    cc = capped_cylinder(2.0, 3.0)
    assert np.allclose(ricci_eigenvalues(cc, 0.1), 0.25)
    assert np.allclose(ricci_eigenvalues(cc, math.pi + 1), 0)
    assert r_k(product_sphere_flat(1.0, 2), None, 2) == 0
    assert r_k(product_sphere_flat(1.0, 2), None, 3) == 1


def test_chart_and_k_errors():
    with pytest.raises(BadK):
        r_k(sphere(2), None, 3)
    with pytest.raises(BadK):
        r_k(sphere(2), None, 0)
    with pytest.raises(OutOfChart):
        ricci_eigenvalues(sphere(2), 4.0)
    with pytest.raises(OutOfChart):
        ricci_eigenvalues(paraboloid(), (1.0, 2.0, 3.0))
    with pytest.raises(OutOfChart):
        ricci_eigenvalues(capped_cylinder(1, 1), 10.0)
    with pytest.raises(OutOfChart):
        ricci_eigenvalues(paraboloid(), (math.nan, 0.0))
    with pytest.raises(InputError):
        from_name("torus")
    with pytest.raises(InputError):
        sphere(1)


@given(st.floats(0, 5))
def test_paraboloid_K_matches_finite_differences(rho):
    ref = oracles.paraboloid_K_monge(rho)
    assert paraboloid_K(rho) == pytest.approx(ref, rel=1e-4)


@given(st.floats(0, 200))
def test_paraboloid_arclength_and_inverse(rho):
    s = float(paraboloid_arclength(rho))
    assert s == pytest.approx(oracles.paraboloid_geodesic_radius(rho), rel=1e-12, abs=1e-13)
    assert paraboloid_rho_at(s) == pytest.approx(rho, rel=1e-10, abs=1e-12)


@given(st.floats(0.01, 30))
def test_paraboloid_area(rho):
    ref = quad(lambda r: 2 * math.pi * r * math.sqrt(1 + 4 * r * r), 0, rho, epsrel=1e-13)[0]
    assert paraboloid_area(rho) == pytest.approx(ref, rel=1e-10)


def test_curvature_decay_at_large_radius():
    rho = 100.0
    assert paraboloid_K(rho) * 4 * rho**4 == pytest.approx(1, rel=1e-4)


# -- volumes ----------------------------------------------------------------------

def test_ball_volumes_closed_forms():
    assert ball_volume(flat(3), 2.0) == pytest.approx(4 / 3 * math.pi * 8, rel=1e-10)
    assert ball_volume(flat(2), 1.5) == pytest.approx(math.pi * 2.25, rel=1e-10)
    assert ball_volume(sphere(2, 1.0), math.pi) == pytest.approx(4 * math.pi, rel=1e-10)
    assert ball_volume(sphere(2, 1.0), 10.0) == pytest.approx(4 * math.pi, rel=1e-10)
    assert ball_volume(sphere(2, 2.0), math.pi) == pytest.approx(2 * math.pi * 4, rel=1e-10)
    assert ball_volume(sphere(3, 1.0), math.pi) == pytest.approx(2 * math.pi**2, rel=1e-10)
    rho, h = 1.5, 2.0
    total = 4 * math.pi * rho**2 + 2 * math.pi * rho * h
    assert ball_volume(capped_cylinder(rho, h), math.pi * rho + h) == pytest.approx(total, rel=1e-10)


@given(st.floats(0.1, 5), st.floats(0.5, 3))
def test_product_ball_volume(r, rho):
    ref = quad(lambda a: 2 * math.pi * rho * math.sin(a / rho) * 2 * math.sqrt(max(r * r - a * a, 0)),
               0, min(r, math.pi * rho), epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    assert ball_volume(product_sphere_flat(rho, 1), r) == pytest.approx(ref, rel=1e-7)


@given(st.floats(0.05, 20), st.floats(0.05, 20))
def test_ball_volume_monotone(a, b):
    lo, hi = sorted((a, b))
    for m in (paraboloid(), sphere(2), capped_cylinder(1, 2), flat(2)):
        assert ball_volume(m, lo) <= ball_volume(m, hi) * (1 + 1e-12)


# -- quadrature -------------------------------------------------------------------

@pytest.mark.parametrize("f,a,b", [
    (np.sin, 0.0, math.pi),
    (lambda x: np.exp(-x * x), -3.0, 2.0),
    (lambda x: np.minimum(np.maximum(x * x - 1, 0), 2), -3.0, 3.0),
    (lambda x: 1.0 / (1 + 100 * x * x), -1.0, 1.0),
])
def test_adaptive_simpson_matches_scipy(f, a, b):
    ref = quad(lambda x: float(f(np.asarray([x]))[0]), a, b, epsabs=1e-13, epsrel=1e-13, limit=500,
               points=[0.0] if a < 0 < b else None)[0]
    got = adaptive_simpson(f, a, b, tol=1e-10)
    assert got.value == pytest.approx(ref, abs=1e-8)
    assert not got.depth_hit


def test_adaptive_simpson_edges():
    # square-root cusp: accurate, although the recursion bottoms out near 0
    root = adaptive_simpson(lambda x: np.sqrt(np.abs(x)), -1.0, 4.0, tol=1e-10)
    assert root.value == pytest.approx(2 / 3 + 16 / 3, abs=1e-8)
    cubic = adaptive_simpson(lambda x: x**3 - 2 * x, 0.0, 2.0)
    assert cubic.value == pytest.approx(0.0, abs=1e-14)
    assert adaptive_simpson(np.cos, 1.0, 1.0).value == 0
    assert adaptive_simpson(np.cos, 1.0, 0.0).value == pytest.approx(-math.sin(1.0))
    step = adaptive_simpson(lambda x: (x > 1 / 3).astype(float), 0.0, 1.0, tol=1e-14, max_depth=8)
    assert step.depth_hit


# -- ball integrals ---------------------------------------------------------------

@settings(max_examples=25)
@given(st.floats(0.1, 60), st.floats(0.1, 100), st.floats(0.05, 2.0))
def test_paraboloid_clamp_average_matches_oracle(r, g, L):
    est = ball_integral(paraboloid(), None, r, Integrand.clamp(1, g=g, L=L))
    ref = oracles.paraboloid_average_oracle(r, lambda p: min(max(g * paraboloid_K(p), 0.0), L))
    assert est.value == pytest.approx(ref, abs=1e-8)
    assert est.abs_error_bound <= 1e-7


@given(st.floats(0.1, 30), st.floats(0.1, 2.0))
def test_paraboloid_power_average_matches_oracle(r, s):
    est = ball_integral(paraboloid(), None, r, Integrand.power(2, s))
    ref = oracles.paraboloid_average_oracle(r, lambda p: (2 * paraboloid_K(p)) ** s)
    assert est.value == pytest.approx(ref, rel=1e-7, abs=1e-9)


def test_capped_cylinder_total_average():
    rho, h = 1.5, 2.0
    m = capped_cylinder(rho, h)
    est = ball_integral(m, None, math.pi * rho + h, Integrand.clamp(2))
    caps = 4 * math.pi * rho**2
    expect = 2 / rho**2 * caps / (caps + 2 * math.pi * rho * h)
    assert est.value == pytest.approx(expect, rel=1e-9)


def test_homogeneous_fields_are_exact():
    est = ball_integral(sphere(2, 1.0), None, 0.3, Integrand.clamp(1))
    assert est.value == 1.0 and est.abs_error_bound == 0
    assert ball_integral(flat(3), None, 2.0, Integrand.power(3, 0.5)).value == 0
    est = ball_integral(sphere(2, 1.0), [0.7], 0.3, Integrand.clamp(2, g=0.25, L=0.4))
    assert est.value == 0.4


@pytest.mark.parametrize("m,r,integrand", [
    (paraboloid(), 3.0, Integrand.clamp(1, g=4.0, L=1.0)),
    (paraboloid(), 0.7, Integrand.power(2, 0.5)),
    (capped_cylinder(1.0, 2.0), 3.0, Integrand.clamp(2)),
    (sphere(2, 2.0), 1.0, Integrand.clamp(1, g=3.0, L=2.0)),
])
def test_monte_carlo_agrees_with_quadrature(m, r, integrand):
    q = ball_integral(m, None, r, integrand)
    mc = ball_integral(m, None, r, integrand, "monte_carlo", seed=11)
    assert abs(mc.value - q.value) <= mc.abs_error_bound + 1e-12
    again = ball_integral(m, None, r, integrand, "monte_carlo", seed=11)
    assert again == mc


def test_off_axis_support():
    pt = [0.4, 0.2]
    mc = ball_integral(product_sphere_flat(1.0, 1), pt, 0.5, Integrand.clamp(2), "monte_carlo", seed=2)
    assert mc.value == pytest.approx(1.0)
    mc = ball_integral(flat(2), [3.0, 1.0], 1.0, Integrand.clamp(2), "monte_carlo", seed=2)
    assert mc.value == 0
    with pytest.raises(UnsupportedBase):
        ball_integral(paraboloid(), (1.0, 0.0), 1.0, Integrand.clamp(1), "monte_carlo", seed=1)
    with pytest.raises(UnsupportedBase):
        ball_integral(capped_cylinder(), 1.0, 1.0, Integrand.clamp(1), "monte_carlo", seed=1)
    with pytest.raises(UnsupportedBase):
        ball_integral(paraboloid(), (1.0, 0.0), 1.0, Integrand.clamp(1))


def test_ball_integral_errors():
    with pytest.raises(InputError):
        ball_integral(paraboloid(), None, 1.0, Integrand.clamp(1), "monte_carlo")
    with pytest.raises(InputError):
        ball_integral(paraboloid(), None, 1.0, Integrand.clamp(1), "trapezoid")
    with pytest.raises(BadParameters):
        ball_integral(paraboloid(), None, 0.0, Integrand.clamp(1))
    with pytest.raises(BadK):
        ball_integral(paraboloid(), None, 1.0, Integrand.clamp(3))
    with pytest.raises(InputError):
        Integrand("cube")


@settings(max_examples=25)
@given(st.floats(0.2, 40), st.floats(0.1, 50), st.floats(0.05, 2), st.floats(1.0, 3.0))
def test_clamp_average_is_monotone(r, g, L, factor):
    m = paraboloid()
    base = ball_integral(m, None, r, Integrand.clamp(1, g=g, L=L)).value
    more_L = ball_integral(m, None, r, Integrand.clamp(1, g=g, L=L * factor)).value
    more_g = ball_integral(m, None, r, Integrand.clamp(1, g=g * factor, L=L)).value
    assert 0 <= base <= L + 1e-12
    assert more_L >= base - 1e-8
    assert more_g >= base - 1e-8


# -- scans ------------------------------------------------------------------------

def test_scan_trends():
    grid = [2.0**j for j in range(10)]
    para = tangent_hypothesis_scan(paraboloid(), None, 1, 1.0, 1.0, grid)
    assert para.trend == "approaching 0"
    assert para.rows[-1][1] == pytest.approx(0.0116964, abs=1e-7)
    sph = tangent_hypothesis_scan(sphere(2, 1.0), None, 1, 1.0, 1.0, [0.1 * 2**j for j in range(6)])
    assert sph.trend == "approaching L"
    prod = tangent_hypothesis_scan(product_sphere_flat(1.0, 1), None, 1, 1.0, 1.0, grid,
                                   method="monte_carlo", seed=4)
    assert prod.trend == "approaching 0" and all(v == 0 for _, v, _ in prod.rows)


def test_scan_validation():
    with pytest.raises(BadParameters):
        tangent_hypothesis_scan(paraboloid(), None, 1, 2.0, 1.0, [1, 2])
    with pytest.raises(BadParameters):
        tangent_hypothesis_scan(paraboloid(), None, 1, 1.0, 1.0, [2, 1])
    with pytest.raises(BadParameters):
        tangent_hypothesis_scan(paraboloid(), None, 1, 1.0, 1.0, [])


def test_scan_trend_classifier():
    assert scan_trend([1, 0.5, 0.2, 0.05], [0] * 4, 1) == "approaching 0"
    assert scan_trend([0.1, 0.5, 0.95, 0.99], [0] * 4, 1) == "approaching L"
    assert scan_trend([0.5, 0.4, 0.6, 0.5], [0] * 4, 1) == "inconclusive"
    assert scan_trend([0.5, 0.4, 0.3], [0] * 3, 1) == "inconclusive"
    # wiggles inside the error bars do not break monotonicity
    assert scan_trend([0.3, 0.05, 0.06, 0.04], [0.02] * 4, 1) == "approaching 0"
    assert scan_trend([0.5], [0], 1) == "inconclusive"


# -- eigenvalue lemma -------------------------------------------------------------

def _hand_violation(eps_prime=0.9, c1=1e-4):
    A = np.zeros((3, 2))
    A[0, 0] = math.sqrt(1 + c1 / 2)
    A[1, 1] = 1.0
    lam = np.array([-0.5, 0.5 + 1e-9, 1.0])
    return EigenSample(A, lam, eps_prime, c1, 4.0, 1.0)


def test_l14_hand_built_violation():
    res = l14_verify(_hand_violation())
    assert res.tag == "ok" and not res.holds and not bool(res)
    lhs, rhs = oracles.l14_sides_mpmath(_hand_violation().A, _hand_violation().lam, 0.9)
    assert res.lhs == pytest.approx(float(lhs), abs=1e-12)
    assert res.rhs == pytest.approx(float(rhs), abs=1e-12)
    # the same spectrum breaks lambda_1 >= -eps' once eps' is small
    small = l14_verify(_hand_violation(eps_prime=1e-4))
    assert small.tag == "hypotheses unmet" and "lambda_1 >= -eps'" in small.unmet


def test_l14_unmet_tags():
    A = np.eye(3)[:, :2] * 2
    s = EigenSample(A, np.array([0.3, 0.2, 1.0]), 1e-4, 1e-4, 4.0, 1.0)
    unmet = set(s.unmet())
    assert {"|A^T A - I| <= c1", "|A|^2 <= c", "lambda sorted", "lambda_k >= eps/2k"} <= unmet
    bad_shape = EigenSample(np.eye(2), np.ones(3), 1e-4, 1e-4, 4.0, 1.0)
    assert l14_verify(bad_shape).unmet == ("shape",)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 1), (3, 2), (4, 2), (5, 3)]))
def test_l14_generators_respect_hypotheses(seed, nk):
    n, k = nk
    rng = np.random.default_rng(seed)
    A = _frames(rng, 64, n, k, 1e-4)
    lam = _spectra(rng, 64, n, k, 1.0, 1e-4)
    for a, l in zip(A, lam):
        s = EigenSample(a, l, 1e-4, 1e-4, 4.0, 1.0)
        # float slack on the frame constraint only
        assert set(s.unmet()) <= {"|A|^2 <= c"}
        assert np.linalg.norm(a.T @ a - np.eye(k)) <= 1e-4 * (1 + 1e-9)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_l14_sides_match_mpmath(seed):
    rng = np.random.default_rng(seed)
    A = _frames(rng, 1, 4, 2, 1e-4)[0]
    lam = _spectra(rng, 1, 4, 2, 1.0, 1e-4)[0]
    lhs, rhs = l14_sides(A, lam, 1e-4)
    mlhs, mrhs = oracles.l14_sides_mpmath(A, lam, 1e-4)
    assert lhs == pytest.approx(float(mlhs), abs=1e-12)
    assert rhs == pytest.approx(float(mrhs), abs=1e-12)


def test_l14_search_small_and_large_eps_prime():
    for nk in [(1, 1), (2, 1), (3, 2)]:
        assert not l14_search(*nk, trials=20000, rng_seed=3).found
    hit = l14_search(3, 2, trials=20000, rng_seed=3, eps_prime=0.9)
    assert hit.found and hit.trial_index < 20000
    res = l14_verify(hit.counterexample)
    assert res.tag == "ok" and not res.holds
    lhs, rhs = oracles.l14_sides_mpmath(hit.counterexample.A, hit.counterexample.lam, 0.9)
    assert float(lhs) < float(rhs)
    # k = 1 leaves no room: every eigenvalue is at least eps/2
    assert not l14_search(2, 1, trials=20000, rng_seed=3, eps_prime=0.9).found


def test_l14_search_is_deterministic_and_validated():
    a = l14_search(4, 2, trials=5000, rng_seed=9, eps_prime=0.9, batch=1000)
    b = l14_search(4, 2, trials=5000, rng_seed=9, eps_prime=0.9, batch=1000)
    assert a.to_dict() == b.to_dict()
    assert l14_search(2, 1, trials=1234, rng_seed=1).trials == 1234
    with pytest.raises(BadK):
        l14_search(2, 3)
    with pytest.raises(BadParameters):
        l14_search(2, 1, trials=0)


# -- Vitali cover -----------------------------------------------------------------

def _line():
    x = np.arange(-100, 101, dtype=float)
    return x, np.ones_like(x), np.arange(20) + 0.5


def test_vitali_single_spike_exact():
    x, w, radii = _line()
    f = np.zeros_like(x)
    f[100] = 40.0
    cov = scale_pick_cover(x, f, w, 0.25, 6.0, radii)
    # score(r) = 20 r^(-1/2) for balls containing the spike, so r_y = 10.5 and
    # the spike wins the tie on field value
    assert [(b[0], b[3]) for b in cov.balls] == [(100, 10.5)]
    assert cov.bad_cells == 21
    assert cov.grid_constant == pytest.approx(math.sqrt(5))
    assert cov.weighted_sum == pytest.approx(105 / math.sqrt(52.5))
    assert cov.bound == pytest.approx(math.sqrt(5) / 6 * 40)
    assert cov.bound_holds
    assert fifth_balls_disjoint(x, cov) and covers_bad_cells(x, f, w, cov, radii)
    d = cov.to_dict()
    assert d["bound_holds"] and d["balls"][0][2] == 52.5


def test_vitali_zero_field_and_errors():
    x, w, radii = _line()
    cov = scale_pick_cover(x, np.zeros_like(x), w, 0.5, 1.0, radii)
    assert cov.balls == () and cov.weighted_sum == 0 and cov.bound_holds
    for s in (0.0, 1.0, -0.1):
        with pytest.raises(BadExponent):
            scale_pick_cover(x, w, w, s, 1.0, radii)
    with pytest.raises(BadParameters):
        scale_pick_cover(x, w, w, 0.5, 0.0, radii)
    with pytest.raises(BadParameters):
        scale_pick_cover(x, w, w, 0.5, 1.0, radii[::-1])
    with pytest.raises(BadParameters):
        scale_pick_cover(x, -w, w, 0.5, 1.0, radii)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95), st.floats(0.05, 5.0),
       st.sampled_from([1, 2]))
def test_vitali_properties_on_random_fields(seed, s, eta, dim):
    rng = np.random.default_rng(seed)
    side = 41 if dim == 1 else 13
    axes = np.arange(side, dtype=float) - side // 2
    if dim == 1:
        pts = axes
    else:
        pts = np.stack(np.meshgrid(axes, axes, indexing="ij"), axis=-1).reshape(-1, 2)
    N = len(pts)
    f = np.where(rng.random(N) < 0.1, rng.exponential(5.0, N), 0.0)
    w = rng.uniform(0.5, 2.0, N)
    radii = np.arange(8) + 0.5
    cov = scale_pick_cover(pts, f, w, s, eta, radii)
    assert fifth_balls_disjoint(pts, cov)
    assert covers_bad_cells(pts, f, w, cov, radii)
    assert cov.bound_holds
