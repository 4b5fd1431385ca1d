import numpy as np
import pytest
from scipy.optimize import brentq

from chorea.diagnostics import (
    CollisionLocalFrame,
    Monotonicity,
    eom_residual,
    frame_shifted,
    inertial_state,
    monotonicity_check,
    planarity_check,
    refine_near_collision,
    regularizability_check,
    reintegration_error,
    richardson_limit,
    run_diagnostics,
    sundman_fit,
    verdicts,
)
from chorea.errors import AmbiguousPairing, CollisionSingularity, DegenerateLoop, InsufficientSamples, NotIsolated
from chorea.loops import FourierLoop, synthesize
from chorea.ngon import NGonLabel, build_rotating_ngon, ngon_loop
from chorea.sampled import SampledLoop
from chorea.solver import Problem, solve
from chorea.symmetry import Kind, SymmetryClass
from chorea.topology import SignPattern
from conftest import random_loop

SPECTATOR = np.array([40.0, 0.0, 0.0])


@pytest.fixture(scope="module")
def figure_eight():
    return solve(Problem(SymmetryClass(3), SignPattern((1, -1)), 0.0, order=32)).loop


# ---------------------------------------------------------------------------
# closed-form two-body collisions (unit masses, pair energy E = |v|^2/4 - 1/d)


def parabolic(t):
    """Separation and its rate on the zero-energy radial arc d = (3|t|)^(2/3)."""
    s = abs(t)
    return (3 * s) ** (2 / 3), np.sign(t) * 2 * (3 * s) ** (-1 / 3)


def hyperbolic(energy):
    """Radial arc with pair energy ``energy`` > 0 leaving the collision at t = 0."""
    a = 1 / (2 * energy)
    scale = np.sqrt(a**3 / 2)

    def arc(t):
        s = abs(t)
        eta = brentq(lambda e: scale * (np.sinh(e) - e) - s, 0.0, 50.0, xtol=1e-15, rtol=1e-15)
        d = a * (np.cosh(eta) - 1)
        rate = a * np.sinh(eta) / (scale * (np.cosh(eta) - 1))
        return d, np.sign(t) * rate

    return arc


def direction(phi, theta):
    return np.array([np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)])


def collision_trajectory(before_dir, after_dir, after_arc=parabolic, drift=(np.zeros(3), np.zeros(3))):
    """Pair colliding at t = 0 with a distant spectator; ``drift`` gives the pair's center velocity on each side."""
    def traj(t):
        arc, u = (parabolic, before_dir) if t < 0 else (after_arc, after_dir)
        d, rate = arc(t)
        center_velocity = np.asarray(drift[0] if t < 0 else drift[1])
        center = center_velocity * t
        pos = np.array([center + 0.5 * d * u, center - 0.5 * d * u, SPECTATOR])
        vel = np.array([center_velocity + 0.5 * rate * u, center_velocity - 0.5 * rate * u, np.zeros(3)])
        return pos, vel

    return traj


U = direction(1.0, 0.4)


def test_hyperbolic_arc_has_requested_energy():
    arc = hyperbolic(0.3)
    for t in (1e-3, 0.1, 2.0):
        d, rate = arc(t)
        assert 0.25 * rate**2 - 1 / d == pytest.approx(0.3, rel=1e-8)


def test_regularizability_passes_on_symmetric_ejection():
    [res] = regularizability_check(collision_trajectory(U, U), 0.0, [(0, 1)])
    assert res.passed
    for value in (res.delta_phi, res.phi_rate, res.delta_theta, res.theta_rate, res.delta_energy,
                  res.center_jump, res.center_velocity_jump):
        assert abs(value) < 1e-6


@pytest.mark.parametrize(
    "traj, field",
    [
        (collision_trajectory(U, direction(1.3, 0.4)), "delta_phi"),
        (collision_trajectory(U, U, after_arc=hyperbolic(0.5)), "delta_energy"),
        (collision_trajectory(U, U, drift=([0.2, 0.0, 0.0], [0.0, 0.2, 0.0])), "center_velocity_jump"),
        (collision_trajectory(U, direction(1.0, 1.2)), "delta_theta"),
    ],
)
def test_regularizability_fails_on_single_violation(traj, field):
    [res] = regularizability_check(traj, 0.0, [(0, 1)])
    assert not res.passed
    assert abs(getattr(res, field)) > 1e-2
    others = {"delta_phi", "delta_energy", "center_velocity_jump", "delta_theta"} - {field}
    for name in others:
        assert abs(getattr(res, name)) < 1e-6


def test_regularizability_input_errors():
    traj = collision_trajectory(U, U)
    with pytest.raises(AmbiguousPairing):
        regularizability_check(traj, 0.0, [(0, 1), (1, 2)])
    with pytest.raises(NotIsolated):
        regularizability_check(traj, 0.0, [(0, 2)])

    def crowded(t):
        pos, vel = traj(t)
        pos[2] = 0.5 * (pos[0] + pos[1]) + [0, 0, 1e-6]
        return pos, vel

    with pytest.raises(AmbiguousPairing):
        regularizability_check(crowded, 0.0, [(0, 1)])


def test_sundman_exponent_on_closed_form_arc():
    for side in ("before", "after"):
        frame = CollisionLocalFrame.from_trajectory(collision_trajectory(U, U), (0, 1), 0.0, side, 1e-2)
        fit = sundman_fit(frame)
        assert abs(fit.exponent - 2 / 3) < 1e-6
        assert fit.c1 == pytest.approx(0.5 * 3 ** (2 / 3), rel=1e-9)


def test_sundman_exponent_holds_asymptotically_on_hyperbolic_arc():
    frame = CollisionLocalFrame.from_trajectory(collision_trajectory(U, U, hyperbolic(0.5)), (0, 1), 0.0,
                                                "after", 1e-4, levels=8)
    assert abs(sundman_fit(frame).exponent - 2 / 3) < 1e-3


def test_sundman_fit_needs_samples():
    frame = CollisionLocalFrame((0, 1), "after", np.array([1.0, 0.5]), np.array([1.0, 0.6]))
    with pytest.raises(InsufficientSamples):
        sundman_fit(frame)


def test_local_frame_validation():
    with pytest.raises(ValueError):
        CollisionLocalFrame((0, 1), "during", np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        CollisionLocalFrame((0, 1), "after", np.ones(3), -np.ones(3))
    with pytest.raises(ValueError):
        CollisionLocalFrame((0, 1), "after", np.ones(3), np.ones(3), phi=np.full(3, 4.0))


def test_richardson_limit_is_exact_on_polynomials():
    dt = 1e-1 * 0.5 ** np.arange(5)
    assert richardson_limit(dt, 2 + 3 * dt - 5 * dt**2 + dt**4) == pytest.approx(2.0, abs=1e-12)


def test_refine_near_collision_follows_kepler_arc():
    pos, vel = collision_trajectory(U, U)(0.5)
    frame = refine_near_collision(pos[:2], vel[:2], 0.5, 0.0, (0, 1), 1e-2)
    exact = 0.5 * (3 * frame.dt) ** (2 / 3)
    np.testing.assert_allclose(frame.r, exact, rtol=1e-6)
    assert abs(sundman_fit(frame).exponent - 2 / 3) < 1e-5
    with pytest.raises(InsufficientSamples):
        refine_near_collision(pos, vel, 0.5, 0.0, (0, 1), 0.6)


# ---------------------------------------------------------------------------
# equations of motion and shape


def test_rotating_polygon_satisfies_equations(rng):
    orbit = build_rotating_ngon(NGonLabel(5, 2, 1), 1.5, order=4)
    assert eom_residual(orbit.loop, 1.5) < 1e-10
    assert reintegration_error(orbit.loop, 1.5) < 1e-9
    assert eom_residual(random_loop(SymmetryClass(3), 6, rng), 0.0) > 1e-2


def test_eom_rejects_collisions():
    with pytest.raises(CollisionSingularity):
        eom_residual(FourierLoop.zeros(SymmetryClass(3), 3), 0.0)
    with pytest.raises(TypeError):
        eom_residual(np.zeros((6, 3, 3)), 0.0)


def test_figure_eight_diagnostics(figure_eight):
    report = run_diagnostics(figure_eight, 0.0)
    assert report.eom_residual < 1e-5
    assert report.reintegration_error < 1e-4
    assert report.planarity.residual < 1e-6 and report.planarity.xz_symmetric
    assert report.monotone_x is not Monotonicity.VIOLATED
    assert report.monotone_z is not Monotonicity.VIOLATED
    assert all(verdicts(report).values())
    assert report.min_distance_ratio > 0.05
    assert report.as_dict()["monotone_x"] == "StrictMonotone"


def test_diagnostics_do_not_modify_their_input(figure_eight):
    sl = synthesize(figure_eight, 384)
    before = sl.positions.copy()
    run_diagnostics(sl, 0.0, reintegrate=False)
    planarity_check(sl)
    frame_shifted(sl, 3)
    assert np.array_equal(sl.positions, before)
    assert not figure_eight.a.flags.writeable


def test_planarity_is_rotation_invariant(figure_eight, rng):
    sl = synthesize(figure_eight, 384)
    base = planarity_check(sl).residual
    for _ in range(5):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        turned = SampledLoop(sl.positions @ q.T)
        assert planarity_check(turned).residual == pytest.approx(base, abs=1e-12)


def test_planarity_examples(rng):
    bent = random_loop(SymmetryClass(3), 5, rng)
    assert planarity_check(bent).residual > 1e-3
    with pytest.raises(DegenerateLoop):
        planarity_check(SampledLoop(np.zeros((12, 3, 3))))


def test_monotonicity_examples():
    sym = SymmetryClass(3)
    loop = FourierLoop(np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0]), np.zeros(3), sym)
    assert monotonicity_check(loop, "x") is Monotonicity.STRICT_MONOTONE
    assert monotonicity_check(loop, "z") is Monotonicity.CONSTANT_Z
    wavy = FourierLoop(np.array([0.0, 1.0, 0.0, 0.5]), np.array([0.0, 1.0, 0.0]), np.zeros(4), sym)
    assert monotonicity_check(wavy, "x") is Monotonicity.VIOLATED
    flat = FourierLoop(np.zeros(3), np.array([0.0, 1.0]), np.array([0.0, 1.0, 0.0]), sym)
    assert monotonicity_check(flat, "x") is Monotonicity.CONSTANT_X


def test_frame_shift_matches_coefficient_rotation(rng):
    from chorea.loops import rotate_frame

    fl = random_loop(SymmetryClass(3), 5, rng)
    np.testing.assert_allclose(frame_shifted(synthesize(fl, 96), 3).positions,
                               synthesize(rotate_frame(fl, 3), 96).positions, atol=1e-13)


def test_inertial_state_matches_finite_differences(rng):
    fl = random_loop(SymmetryClass(4), 5, rng)
    t, h = 0.3, 1e-6
    pos, vel = inertial_state(fl, t, 1.7)
    fd = (inertial_state(fl, t + h, 1.7)[0] - inertial_state(fl, t - h, 1.7)[0]) / (2 * h)
    np.testing.assert_allclose(vel, fd, atol=1e-8)
    np.testing.assert_allclose(np.linalg.norm(pos, axis=1), np.linalg.norm(inertial_state(fl, t, 0.0)[0], axis=1))


def test_extended_symmetry_minimizer_lies_in_yz_plane():
    loop = solve(Problem(SymmetryClass(3, Kind.HN), SignPattern((1, -1)), 0.0, order=16)).loop
    report = run_diagnostics(loop, 0.0, reintegrate=False)
    assert abs(report.planarity.normal[0]) == pytest.approx(1.0)
    assert report.monotone_x is Monotonicity.CONSTANT_X


def test_position_coriolis_variant_is_reported():
    orbit = build_rotating_ngon(NGonLabel(3, 2, -1), 1.5, order=4)
    report = run_diagnostics(orbit.loop, 1.5, reintegrate=False)
    assert report.eom_residual < 1e-10
    assert report.eom_residual_position_coriolis is not None
    assert ngon_loop(NGonLabel(3, 2, -1), 1.0).order == 2
