import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from chorea.action import action_omega, gradient_omega
from chorea.diagnostics import eom_residual
from chorea.errors import OmegaEqualsK
from chorea.loops import FourierLoop, synthesize
from chorea.nbody import force
from chorea.ngon import NGonLabel, build_ngon, build_rotating_ngon, ngon_loop, ngon_radius, ngon_scale

CASES = [(3, 2), (5, 2), (5, 4)]
OFFSETS = [-0.5, -0.1, 0.1, 0.5]


def test_radius_examples():
    assert ngon_radius(2) ** 3 == pytest.approx(0.25, rel=1e-14)
    assert ngon_radius(2) == pytest.approx(0.6299605249, rel=1e-9)
    assert ngon_radius(3) ** 3 == pytest.approx(1 / np.sqrt(3), rel=1e-14)
    assert ngon_radius(4) ** 3 == pytest.approx((1 + 2 * np.sqrt(2)) / 4, rel=1e-14)


@pytest.mark.parametrize("n", range(2, 9))
def test_polygon_is_central_with_unit_angular_velocity(n):
    for k in range(1, n):
        if np.gcd(k, n) != 1:
            continue
        c = build_ngon(NGonLabel(n, k, 1))
        np.testing.assert_allclose(force(c), -c.positions, atol=1e-13)


def test_label_validation():
    with pytest.raises(ValueError):
        NGonLabel(4, 2, 1)
    with pytest.raises(ValueError):
        NGonLabel(3, 1, 0)
    with pytest.raises(ValueError):
        NGonLabel(3, 3, 1)
    assert str(NGonLabel(5, 2, -1)) == "N5k2-"


def test_omega_equal_k_raises():
    with pytest.raises(OmegaEqualsK):
        build_rotating_ngon(NGonLabel(3, 2, -1), 2.0)
    with pytest.raises(OmegaEqualsK):
        ngon_scale(1, 1)


def test_ngon_loop_is_single_harmonic():
    lab = NGonLabel(5, 2, -1)
    fl = ngon_loop(lab, 2.0, order=6)
    t = np.linspace(0, 2 * np.pi, 17)
    q = fl.evaluate(t)
    np.testing.assert_allclose(q[:, 0] + 1j * q[:, 1], -2.0 * ngon_radius(5) * np.exp(-2j * t), atol=1e-14)
    assert np.all(q[:, 2] == 0)


@pytest.mark.parametrize("n,k", CASES)
@pytest.mark.parametrize("offset", OFFSETS)
@pytest.mark.parametrize("sign", [1, -1])
def test_rotating_ngon_is_critical(n, k, offset, sign):
    orbit = build_rotating_ngon(NGonLabel(n, k, sign), k + offset, order=8)
    assert gradient_omega(orbit.loop, orbit.omega).norm() < 1e-6
    assert eom_residual(orbit.loop, orbit.omega) < 1e-9


def stationary_scale(label: NGonLabel, omega: float) -> float:
    """Independent route: minimize the action along the ray through the unit polygon."""
    res = minimize_scalar(lambda s: action_omega(ngon_loop(label, s), omega).total,
                          bracket=(0.1, 1.0, 20.0), tol=1e-12)
    return res.x * ngon_radius(label.n)


@pytest.mark.parametrize("n,k", CASES)
def test_radius_scaling_exponent(n, k):
    lab = NGonLabel(n, k, -1)
    gaps = np.array([0.5, 0.1])
    for side in (-1, 1):
        radii = [stationary_scale(lab, k + side * g) for g in gaps]
        slope = np.polyfit(np.log(gaps), np.log(radii), 1)[0]
        assert abs(slope + 2 / 3) < 0.01
        for g, r in zip(gaps, radii):
            assert r == pytest.approx(build_rotating_ngon(lab, k + side * g).radius, rel=1e-5)


def test_rotating_ngon_loop_samples_are_polygons():
    orbit = build_rotating_ngon(NGonLabel(3, 2, -1), 1.5)
    sl = synthesize(orbit.loop, 48)
    d = np.linalg.norm(sl.positions[:, 0] - sl.positions[:, 1], axis=-1)
    np.testing.assert_allclose(d, orbit.radius * np.sqrt(3), rtol=1e-13)
    assert isinstance(orbit.loop, FourierLoop)
