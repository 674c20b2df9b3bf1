import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from affineflow import diagnostics as D
from affineflow.acceptance import CORPUS_SEEDS, random_sl2
from affineflow.body import (LinearMap, apply_linear_map, make_disk, make_ellipse, make_random_body, scale,
                             translate)
from affineflow.flow import FlowState, SnapshotMonitor, StepController, run

seeds = st.integers(0, 10_000)


@pytest.fixture(scope="module")
def random_traj():
    snap = SnapshotMonitor()
    traj, final = run(make_random_body(1), monitors=[snap], record_every=20, t_end=0.3)
    return traj, snap


@pytest.fixture(scope="module")
def ellipse_traj():
    snap = SnapshotMonitor()
    traj, _ = run(make_ellipse(2, 0.5), monitors=[snap], record_every=50, t_end=0.3)
    return traj, snap


# ------------------------------------------------------------------ monotone monitors

def test_monotone_report_directions():
    t = [0, 1, 2, 3]
    assert D.monotone_report("x", t, [1, 2, 2, 3], "up", 0).verdict == D.MONOTONE_UP
    rep = D.monotone_report("x", t, [1, 2, 1.5, 3], "up", 1e-3)
    assert rep.verdict == D.VIOLATED and rep.violations == [(2.0, 0.5)]
    assert D.monotone_report("x", t, [3, 2, 2, 1], "strict_down", 0).verdict == D.VIOLATED
    assert D.monotone_report("x", t, [3, 2, 1, 0], "strict_down", 0).verdict == D.MONOTONE_DOWN
    with pytest.raises(ValueError):
        D.monotone_report("x", t, t, "sideways", 0)


def test_monitors_need_two_records(random_traj):
    with pytest.raises(ValueError):
        D.monotone_monitors(random_traj[0][:1])


def test_monitors_on_random_trajectory(random_traj):
    reports = {r.name: r for r in D.monotone_monitors(random_traj[0])}
    assert set(reports) == {"aff_iso", "santalo", "area", "omega1_normalized", "omega2", "sigma_ratio"}
    assert all(r.ok for r in reports.values())
    assert reports["area"].verdict == D.MONOTONE_DOWN
    assert reports["sigma_ratio"].verdict == D.BOUNDED


def test_monitors_on_ellipse_trajectory(ellipse_traj):
    reports = D.monotone_monitors(ellipse_traj[0])
    assert all(r.ok for r in reports)
    iso = [v for _, v in reports[0].samples]
    np.testing.assert_allclose(iso, 1.0, atol=1e-8)


def test_sigma_ratio_bound_violation(random_traj):
    reports = {r.name: r for r in D.monotone_monitors(random_traj[0], sigma_ratio_bound=1.0)}
    assert reports["sigma_ratio"].verdict == D.VIOLATED


def test_report_dict_shape(random_traj):
    doc = json.loads(D.monotone_monitors(random_traj[0])[0].to_json())
    assert set(doc) == {"name", "tolerance", "verdict", "violations", "samples_ref"}


# ------------------------------------------------------------------ Harnack

def test_harnack_needs_positive_time():
    with pytest.raises(ValueError):
        D.harnack_quantity(FlowState(0.0, make_disk()), 0.0)


def test_harnack_on_disk_is_closed_form():
    snap = SnapshotMonitor()
    run(make_disk(), monitors=[snap], record_every=100, t_end=0.5)
    rep = D.harnack_check(snap.states(), 0.0)
    assert rep.ok
    for st_ in snap.states()[1:]:
        expect = st_.t**0.25 * (1 - 4 * st_.t / 3) ** -0.25
        np.testing.assert_allclose(D.harnack_quantity(st_, 0.0), expect, rtol=1e-6)


def test_harnack_on_random_body(random_traj):
    _, snap = random_traj
    assert D.harnack_check(snap.states(), 0.0).ok


def test_harnack_detects_decrease():
    states = [FlowState(t, make_disk(rho)) for t, rho in [(0.1, 1.0), (0.2, 0.5)]]
    # growing the body backwards in time makes r^(-1/3) drop
    assert not D.harnack_check(states[::-1], 0.0).ok


def test_ancient_harnack_on_ellipse(ellipse_traj):
    _, snap = ellipse_traj
    assert D.ancient_harnack_check(snap.states()).ok
    e = make_ellipse(2, 0.5)
    np.testing.assert_allclose(D.ancient_harnack_quantity(e), 1.0, rtol=1e-8)


def test_streaming_matches_batch(random_traj):
    _, snap = random_traj
    stream = D.streaming_harnack(0.0)
    for st_ in snap.states():
        stream(st_)
    batch = D.harnack_check(snap.states(), 0.0)
    assert stream.report().verdict == batch.verdict
    np.testing.assert_allclose([w for _, w in stream.samples], [w for _, w in batch.samples])


# ------------------------------------------------------------------ sigma calculus and entropy

def test_sigma_rate_on_ellipse():
    np.testing.assert_allclose(D.sigma_rate(make_ellipse(2, 0.5)), -4 / 3, atol=1e-6)


@pytest.mark.parametrize("body", [make_disk(), make_disk(3.0), make_ellipse(2, 0.5), make_ellipse(1.5, 1, 0.3)])
def test_entropy_vanishes_on_ellipses(body):
    assert abs(D.entropy_functional(body)) <= 1e-12


def test_entropy_positive_off_ellipses():
    for seed in (1, 2, 3):
        assert D.entropy_functional(make_random_body(seed)) > 0


@given(seeds, st.floats(0.2, 5.0))
def test_entropy_scale_invariant(seed, lam):
    body = make_random_body(seed)
    assert D.entropy_functional(scale(body, lam)) == pytest.approx(D.entropy_functional(body), rel=1e-9)


@given(seeds, seeds)
def test_entropy_sl2_invariant(seed, map_seed):
    body = make_random_body(seed, amplitude=0.1)
    phi = random_sl2(np.random.default_rng(map_seed))
    assert D.entropy_functional(apply_linear_map(body, phi)) == pytest.approx(
        D.entropy_functional(body), rel=1e-5, abs=1e-12)


def test_omega_l_rate_requires_l_at_least_two():
    with pytest.raises(ValueError):
        D.omega_l_rate(make_disk(), 1)


def test_omega2_rate_has_no_first_term():
    _, c1 = D.omega_l_rate(make_random_body(1), 2)
    assert c1 == 0.0


def test_omega_l_check_on_ellipse(ellipse_traj):
    _, snap = ellipse_traj
    times, bodies = np.array(snap.times), snap.bodies()
    rep = D.omega_l_derivative_check(times, bodies, 2)
    for _, fd, pred, _ in rep.samples:
        assert abs(fd) <= 1e-5 and abs(pred) <= 1e-5


@pytest.mark.parametrize("l", [3, 4])
def test_omega_l_rate_on_disk(l):
    # disk of radius rho: Omega_l = 2 pi rho^(2(2-l)/(l+2)), rho^(4/3) = 1 - 4t/3
    body = make_disk()
    rate, _ = D.omega_l_rate(body, l)
    expo = 2 * (2 - l) / (l + 2)
    assert rate == pytest.approx(2 * np.pi * expo * -1.0, rel=1e-10)


def test_omega_l_check_on_fine_random_run():
    ctrl = StepController(dt_max=2.5e-5)
    snap = SnapshotMonitor()
    run(make_random_body(1), ctrl, monitors=[snap], max_steps=300)
    times, bodies = np.array(snap.times), snap.bodies()
    for l in (2, 3, 4):
        assert D.omega_l_derivative_check(times, bodies, l).ok
    assert np.max(D.entropy_consistency_errors(times, bodies)) <= 1e-2
    assert np.max(D.sigma_evolution_residuals(times, bodies)) <= 1e-2


def test_area_rate_errors_small(random_traj):
    assert np.max(D.area_rate_errors(random_traj[0])) <= 1e-4


# ------------------------------------------------------------------ SL(2) frame

def test_frame_of_disk_is_identity():
    frame = D.sl2_frame(make_disk())
    np.testing.assert_allclose(frame.phi.matrix, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("a,b,rot", [(2, 0.5, 0), (3, 1, 0.7)])
def test_frame_sends_ellipse_to_disk(a, b, rot):
    e = make_ellipse(a, b, rot)
    framed = apply_linear_map(e, D.sl2_frame(e).phi)
    np.testing.assert_allclose(framed.s, np.sqrt(a * b), atol=1e-6)


@given(st.sampled_from(CORPUS_SEEDS))
def test_frame_gives_isotropic_moments(seed):
    body = make_random_body(seed)
    framed = apply_linear_map(body, D.sl2_frame(body).phi)
    m = D.moment_matrix(framed)
    np.testing.assert_allclose(m, m.trace() / 2 * np.eye(2), atol=1e-8)
    again = D.sl2_frame(framed).phi.matrix
    np.testing.assert_allclose(again, np.eye(2), atol=1e-6)


def test_frame_failure_on_degenerate_moments():
    with pytest.raises(D.FrameFailure):
        D.sl2_frame(make_ellipse(1, 1), max_condition=0.5)


def test_moment_matrix_of_disk():
    np.testing.assert_allclose(D.moment_matrix(make_disk()), np.pi / 4 * np.eye(2), atol=1e-12)


def test_centroid_of_translated_disk():
    c = D.centroid(translate(make_disk(), (0.2, -0.1)))
    np.testing.assert_allclose(c, [0.2, -0.1], atol=1e-12)


# ------------------------------------------------------------------ Monge-Ampere residual, ellipse fit

@pytest.mark.parametrize("a,b,rot", [(2, 0.5, 0), (1, 1, 0), (1.5, 1, 0.3)])
def test_monge_ampere_ellipses(a, b, rot):
    assert D.monge_ampere_residual(make_ellipse(a, b, rot)) <= 1e-8
    assert D.monge_ampere_residual(make_ellipse(a, b, rot), zeta=(a * b) ** (2 / 3)) <= 1e-8


@pytest.mark.parametrize("seed", CORPUS_SEEDS)
def test_monge_ampere_random_corpus(seed):
    assert D.monge_ampere_residual(make_random_body(seed)) > 0.01


def test_fit_ellipse_recovers_axes():
    a, b, rot, err = D.fit_ellipse(make_ellipse(2, 0.5, 0.3))
    assert (a, b) == pytest.approx((2, 0.5), abs=1e-10)
    assert np.tan(rot) == pytest.approx(np.tan(0.3), abs=1e-8)
    assert err <= 1e-10


def test_ellipticity_and_santalo():
    assert D.ellipticity(make_ellipse(2, 0.5)) == pytest.approx(0, abs=1e-8)
    assert D.ellipticity(make_random_body(1)) > 0
    assert D.santalo_product(make_disk()) == pytest.approx(np.pi**2)


def test_identity_map_frame_is_special():
    assert D.sl2_frame(make_disk()).phi.special
    assert isinstance(LinearMap.identity(), LinearMap)
