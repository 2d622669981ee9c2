import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from detanalog.model import DomainError, ModelParams
from detanalog.stability import (
    SearchBox,
    adjoint_eigenvalues,
    adjoint_seed,
    dispersion_1d,
    dispersion_1d_roots,
    dispersion_curve,
    find_roots,
    integrate_adjoint,
    linearized_growth_oracle,
    muller,
    prony_fit,
    stability_function,
)
from detanalog.steady import compute_znd_profile


def test_eigenvalue_example():
    l1, l2 = adjoint_eigenvalues(1.0, 1.0, 0.25)
    assert l1 == pytest.approx(-2 * (1 + math.sqrt(2)), rel=1e-14)
    assert l2 == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-14)


@settings(max_examples=1000, deadline=None)
@given(sr=st.floats(1e-3, 10), si=st.floats(-10, 10), ell=st.floats(1e-6, 5),
       delta=st.floats(1e-2, 1))
def test_eigenvalue_identities_and_branch(sr, si, ell, delta):
    s = complex(sr, si)
    l1, l2 = adjoint_eigenvalues(s, ell, delta)
    scale = max(1.0, abs(s) / delta, ell * ell / delta)
    assert abs((l1 + l2) + s / delta) < 1e-12 * scale
    assert abs(l1 * l2 + ell * ell / delta) < 1e-12 * scale**2
    assert l1.real < 0 < l2.real


def test_seed_direction_for_ell_zero():
    s1, s2 = adjoint_seed(1.0, 0.0, 0.3)
    assert s1 == pytest.approx(1.0) and s2 == 0


def test_requires_right_half_plane(base_profile):
    with pytest.raises(DomainError):
        stability_function(base_profile, -0.1 + 1j, 0.5)
    with pytest.raises(DomainError):
        SearchBox(re=(0.0, 1.0))


def test_rejects_cj_profile():
    prof = compute_znd_profile(ModelParams(4.05, 0.1, 1.0), allow_cj=True)
    with pytest.raises(DomainError):
        stability_function(prof, 0.5, 0.5)


def test_ell_zero_closed_form(base_profile):
    sigma = 0.3 + 0.5j
    sol = integrate_adjoint(base_profile, sigma, 0.0)
    theta = sol.theta1[0] * np.exp(sol.log_scale)
    ref = base_profile.c0 * np.exp(-sigma * base_profile.p)
    ratio = theta / ref
    assert np.max(np.abs(ratio / ratio[-1] - 1)) < 1e-6


def test_left_seed_decay(base_profile):
    sol = integrate_adjoint(base_profile, 0.1 + 0.7j, 0.6)
    logmag = np.log(np.abs(sol.theta1[0])) + sol.log_scale
    far = slice(0, base_profile.xi.size // 10)
    slope = np.polyfit(base_profile.xi[far], logmag[far], 1)[0]
    # |theta| ~ exp(Re(lambda1) |xi|)
    assert slope == pytest.approx(-sol.lambda1.real, rel=0.1)


def test_R_matches_integrate_adjoint(base_profile):
    sol = integrate_adjoint(base_profile, 0.2 + 0.4j, 0.3)
    assert sol.R == pytest.approx(stability_function(base_profile, 0.2 + 0.4j, 0.3), rel=1e-6)


def test_R_ell_zero_is_scaled_1d_relation(base_profile):
    sig = np.array([0.05 + 0.45j, 0.4 + 1.2j, 1.0 + 3.0j])
    R = stability_function(base_profile, sig, 0.0, rtol=1e-11)
    rel = dispersion_1d(base_profile, sig)
    c_min = base_profile.c0[0]
    np.testing.assert_allclose(R * c_min / sig**2, rel, rtol=1e-7)


def test_dispersion_1d_at_zero(base_profile):
    p = base_profile
    expected = p.c0[-1] - np.trapezoid(p.b0, p.xi)
    assert dispersion_1d(p, 0.0) == pytest.approx(expected, abs=1e-6)


def test_conjugate_symmetry(base_profile):
    for s in (0.3 + 0.8j, 1.2 + 4.0j):
        a = stability_function(base_profile, s, 0.7)
        b = stability_function(base_profile, s.conjugate(), 0.7)
        assert b == pytest.approx(a.conjugate(), rel=1e-12)


def test_large_real_sigma_bounded_away(base_profile):
    s1, _ = adjoint_seed(50.0, 0.6, base_profile.delta)
    r = stability_function(base_profile, 50.0, 0.6) / s1
    # dominated by the shock term, which is sigma times the theta1 amplitude
    assert abs(r) > 1.0


@pytest.fixture(scope="module")
def root_06(base_profile):
    return find_roots(base_profile, 0.6)


def test_single_unstable_root_at_06(root_06):
    assert len(root_06) == 1
    r = root_06[0]
    assert r.sigma.real > 0 and r.residual < 1e-8


def test_conjugate_is_root(base_profile, root_06):
    s = root_06[0].sigma.conjugate()
    s1, _ = adjoint_seed(s, 0.6, base_profile.delta)
    assert abs(stability_function(base_profile, s, 0.6) / s1) < 1e-7


def test_seed_scale_invariance(base_profile, root_06):
    box = SearchBox(re=(0.01, 0.2), im=(0.6, 0.9), n_re=6, n_im=6)
    for a in (1e-30, 3.0 - 4.0j, 1e20j):
        roots = find_roots(base_profile, 0.6, box, seed_scale=a)
        assert len(roots) == 1
        assert abs(roots[0].sigma - root_06[0].sigma) < 1e-9


def test_find_roots_agrees_with_1d_relation():
    prof = compute_znd_profile(ModelParams(4.5, 0.1, 1.05))
    box = SearchBox(re=(1e-3, 1.0), im=(0.0, 3.0), n_re=20, n_im=30)
    a = find_roots(prof, 0.0, box)
    b = dispersion_1d_roots(prof, box)
    assert len(a) == len(b) == 1
    assert abs(a[0].sigma - b[0].sigma) < 1e-6


def test_no_1d_roots_small_alpha():
    prof = compute_znd_profile(ModelParams(1.0, 0.1, 1.05))
    box = SearchBox(re=(1e-3, 5.0), im=(0.0, 20.0), n_re=50, n_im=200)
    assert dispersion_1d_roots(prof, box) == []


def test_left_box_only_for_1d(base_profile):
    box = SearchBox(re=(-0.5, 1.0), im=(0.0, 3.0), n_re=30, n_im=60, allow_left=True)
    roots = dispersion_1d_roots(base_profile, box)
    assert roots and roots[0].sigma.real < 0     # just stable in 1D
    assert abs(roots[0].sigma.imag - 0.4521) < 1e-3


def test_muller_polynomial():
    f = lambda z: (z - (1 + 2j)) * (z + 3)
    root, res, it, ok = muller(f, 0.5 + 1.5j, 1.5 + 2.5j, 1.2 + 1.8j)
    assert ok and abs(root - (1 + 2j)) < 1e-12


def test_dispersion_curve_shape(base_profile):
    box = SearchBox(re=(1e-3, 0.5), im=(0.0, 2.0), n_re=10, n_im=20)
    curve = dispersion_curve(base_profile, (0.0, 1.2), 5, box, rescan=False)
    assert curve.growth[0] == 0.0                 # no unstable 1D root
    ell, g = curve.argmax()
    assert ell == pytest.approx(0.6) and g > 0.05
    rows = list(curve.to_csv_rows())
    assert rows[0] == ("ell", "sigma_r", "sigma_i", "residual") and len(rows) == 6
    with pytest.raises(ValueError):
        dispersion_curve(base_profile, n_ell=1)


def test_prony_recovers_exponentials():
    t = np.arange(200) * 0.25
    x = 2.0 * np.exp((0.05 + 0.7j) * t) + 0.3 * np.exp((-0.2 + 1.9j) * t)
    expo, amp, contrib = prony_fit(x, 0.25, 4)
    best = expo[np.argmax(contrib)]
    assert abs(best - (0.05 + 0.7j)) < 1e-8


def test_oracle_zero_initial_data(base_profile):
    n = int(math.ceil((max(base_profile.p[0], 20.0) + 1.0) / 0.1))
    fit = linearized_growth_oracle(base_profile, 0.6, 20.0, h=0.1, init=np.zeros(n))
    assert np.all(fit.us == 0) and fit.growth == -np.inf


def test_oracle_stable_alpha_decays(stable_profile):
    prof = compute_znd_profile(ModelParams(1.0, 0.1, 1.05))
    for ell in (0.0, 0.6):
        assert linearized_growth_oracle(prof, ell, 200.0, h=0.1).growth < 0


def test_oracle_horizon_too_short(base_profile):
    from detanalog.model import IntegrationError
    with pytest.raises(IntegrationError):
        linearized_growth_oracle(base_profile, 0.6, 2.0, h=0.1)
