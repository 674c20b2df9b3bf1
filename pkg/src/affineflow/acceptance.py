"""Acceptance rows: each measures one quantity against an expected value and tolerance.

Heavy trajectories are computed once per process and shared between rows.
"""

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import diagnostics as D
from .body import (LinearMap, apply_linear_map, area, make_disk, make_ellipse, make_random_body,
                   polar_area, polygon_oracle)
from .flow import SnapshotMonitor, StepController, center_at_limit, normalized_view, run

CORPUS_SEEDS = tuple(range(1, 11))
ELLIPSE_AB = (2.0, 0.5)


@dataclass
class Row:
    key: str
    name: str
    measured: float
    expected: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.key:<4} {self.name:<48} measured={self.measured:<12.6g} "
                f"expected={self.expected:<10.6g} tol={self.tol:<8.2g} {self.detail}")


def _within(key, name, measured, expected, tol, detail=""):
    return Row(key, name, float(measured), float(expected), tol, bool(abs(measured - expected) <= tol), detail)


def _at_most(key, name, measured, bound, detail=""):
    return Row(key, name, float(measured), 0.0, bound, bool(measured <= bound), detail)


def _at_least(key, name, measured, bound, detail=""):
    return Row(key, name, float(measured), float(bound), 0.0, bool(measured >= bound), detail)


# ---------------------------------------------------------------- trajectories

@lru_cache(maxsize=None)
def disk_run(radius):
    t = time.perf_counter()
    _, final = run(make_disk(radius), StepController(), record_every=10_000)
    return final.t_extinct, time.perf_counter() - t


@dataclass
class EllipseRun:
    trajectory: list
    final: object
    sigma_t0: float
    sigma_dev: float
    ellipticity_max: float
    affine_time_err: float
    ancient: D.MonitorReport
    sigma_rate_max: float


@lru_cache(maxsize=None)
def ellipse_run(a, b, rot=0.0, record_every=100):
    """Flow an exact ellipse to the area floor, tracking its self-similarity."""
    ctrl = StepController()
    body = make_ellipse(a, b, rot)
    sigma0 = (a * b) ** (2.0 / 3.0)
    stats = {"dev": 0.0, "ell": 0.0, "law": 0.0}

    def watch(state):
        sig = state.body.sigma
        if area(state.body) >= 10 * ctrl.area_floor:
            stats["dev"] = max(stats["dev"], float(np.ptp(sig) / sig.mean()))
            # sigma of an ellipse decreases at the constant rate 4/3
            expect = sigma0 - 4.0 * state.t / 3.0
            stats["law"] = max(stats["law"], abs(sig.mean() - expect) / expect)
        stats["ell"] = max(stats["ell"], D.ellipticity(state.body))

    ancient = D.streaming_ancient_harnack()
    rate = D.SigmaRateMonitor()
    traj, final = run(body, ctrl, monitors=[watch, ancient, rate], record_every=record_every)
    return EllipseRun(traj, final, float(np.max(np.abs(body.sigma - sigma0))), stats["dev"], stats["ell"],
                      stats["law"], ancient.report(), rate.max_rate)


@dataclass
class RandomRun:
    seed: int
    trajectory: list
    final: object
    harnack: D.MonitorReport
    last_body: object


@lru_cache(maxsize=None)
def random_run(seed):
    """Centred random body flowed to the area floor, recorded at every step."""
    ctrl = StepController()
    body = center_at_limit(make_random_body(seed), ctrl)
    harnack = D.streaming_harnack(t0=0.0)
    traj, final = run(body, ctrl, monitors=[harnack], record_every=1)
    return RandomRun(seed, traj, final, harnack.report(), final.body)


@dataclass
class FineRun:
    area_errors: np.ndarray
    sigma_residuals: np.ndarray
    omega_reports: dict
    omega2_coefficient: float
    entropy_errors: np.ndarray
    max_dt: float


@lru_cache(maxsize=None)
def fine_random_run(seed=1, dt_max=2.5e-5):
    """Identity checks on a trajectory with every step recorded and steps capped at ``dt_max``.

    Only the check results are kept; the snapshots are large.
    """
    ctrl = StepController(dt_max=dt_max)
    body = center_at_limit(make_random_body(seed), ctrl)
    snap = SnapshotMonitor()
    traj, _ = run(body, ctrl, monitors=[snap], record_every=1)
    times, bodies = np.array(snap.times), snap.bodies()
    return FineRun(
        area_errors=D.area_rate_errors(traj),
        sigma_residuals=D.sigma_evolution_residuals(times, bodies),
        omega_reports={l: D.omega_l_derivative_check(times, bodies, l) for l in (2, 3)},
        omega2_coefficient=D.omega_l_rate(bodies[0], 2)[1],
        entropy_errors=D.entropy_consistency_errors(times, bodies),
        max_dt=float(np.diff(times).max()),
    )


def random_sl2(rng):
    """SL(2) map rot(alpha) diag(e^u, e^-u) rot(beta) with |u| <= 0.4."""
    u = rng.uniform(-0.4, 0.4)
    alpha, beta = rng.uniform(0.0, 2 * np.pi, size=2)

    def rot(x):
        return np.array([[np.cos(x), -np.sin(x)], [np.sin(x), np.cos(x)]])

    return LinearMap.to_special(rot(alpha) @ np.diag([np.exp(u), np.exp(-u)]) @ rot(beta))


# ---------------------------------------------------------------- criteria

def c01_disk_extinction():
    t_est, secs = disk_run(1.0)
    return [
        _within("1", "unit disk extinction time", t_est, 0.75, 1e-3),
        _at_most("1r", "unit disk run time [s]", secs, 10.0),
    ]


def c02_scaled_disk():
    t_est, _ = disk_run(2.0)
    return [_within("2", "radius-2 disk extinction time", t_est, 0.75 * 2 ** (4 / 3), 2e-3)]


def c03_ellipse_self_similarity():
    e = ellipse_run(*ELLIPSE_AB)
    return [
        _at_most("3a", "ellipse sigma deviation from (ab)^(2/3) at t=0", e.sigma_t0, 1e-6),
        _at_most("3b", "ellipse relative sigma spread along run", e.sigma_dev, 1e-4,
                 f"sigma-mean law err {e.affine_time_err:.2e}"),
        _at_most("3c", "ellipse ellipticity, max over records", e.ellipticity_max, 1e-6),
    ]


def c04_area_rate():
    e = ellipse_run(*ELLIPSE_AB)
    fine = fine_random_run()
    return [
        _at_most("4a", "dA/dt = -Omega_1, ellipse, max rel err", D.area_rate_errors(e.trajectory).max(), 1e-3),
        _at_most("4b", "dA/dt = -Omega_1, random seed 1, max rel err", fine.area_errors.max(), 1e-3),
    ]


def c05_sigma_evolution():
    fine = fine_random_run()
    return [_at_most("5", "sigma evolution residual (max norm)", fine.sigma_residuals.max(),
                     1e-2, f"max record dt {fine.max_dt:.2e}")]


def c06_omega_l_rate():
    fine = fine_random_run()
    rows = []
    for l in (2, 3):
        rep = fine.omega_reports[l]
        rows.append(_at_most(f"6{'ab'[l - 2]}", f"dOmega_{l}/dt formula, max rel err",
                             max(s[3] for s in rep.samples), 1e-2))
    coeff = fine.omega2_coefficient
    rows.append(Row("6c", "l=2 first-integral coefficient is exactly 0", coeff, 0.0, 0.0, coeff == 0.0))
    return rows


def c07_monotonicity():
    rows = []
    for seed in CORPUS_SEEDS:
        r = random_run(seed)
        reps = {m.name: m for m in D.monotone_monitors(r.trajectory, tol=1e-7)}
        ok = reps["aff_iso"].ok and reps["santalo"].ok
        drop = max(-np.diff([v for _, v in reps[k].samples]).max() for k in ("aff_iso", "santalo"))
        rows.append(Row(f"7.{seed}", f"seed {seed}: aff_iso, santalo largest step drop", drop, 0.0, 1e-7, ok,
                        f"{len(r.trajectory)} records"))
    return rows


def c07_convergence():
    rows = []
    for seed in CORPUS_SEEDS:
        r = random_run(seed)
        last = r.trajectory[-1]
        reached = min(max(x.aff_iso for x in r.trajectory), max(x.santalo for x in r.trajectory))
        rows.append(_at_least(f"7c.{seed}", f"seed {seed}: min(aff_iso, santalo) reached", reached, 0.999,
                              f"final A={last.A:.2e}"))
    return rows


def c08_harnack():
    rows = []
    for seed in CORPUS_SEEDS:
        rep = random_run(seed).harnack
        worst = min((w for _, w in rep.samples), default=0.0)
        rows.append(_at_least(f"8.{seed}", f"seed {seed}: min Harnack forward difference", worst, -1e-6))
    return rows


def _ancient_cases():
    return [(*ELLIPSE_AB, 0.0), (1.5, 1.0, 0.3), (1.0, 1.0, 0.0)]


def c09_ancient():
    rows = []
    for i, (a, b, rot) in enumerate(_ancient_cases(), 1):
        e = ellipse_run(a, b, rot)
        worst = min((w for _, w in e.ancient.samples), default=0.0)
        rows.append(_at_least(f"9a.{i}", f"ellipse {a}x{b}: min fwd diff of r^(-1/3)/s", worst, -1e-6))
        rows.append(_at_most(f"9b.{i}", f"ellipse {a}x{b}: max d(sigma)/dt", e.sigma_rate_max, 1e-6))
    return rows


def c10_entropy_zero():
    worst = max(D.entropy_functional(make_ellipse(a, b, rot)) for a, b, rot in
                [(1, 1, 0), (2, 0.5, 0), (3, 1, 0.7), (1.2, 0.9, 2.0)])
    return [_at_most("10a", "entropy on ellipses", abs(worst), 1e-10)]


def c10_entropy_invariance():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for seed in (1, 2, 3):
        body = make_random_body(seed)
        e0 = D.entropy_functional(body)
        for _ in range(5):
            e1 = D.entropy_functional(apply_linear_map(body, random_sl2(rng)))
            worst = max(worst, abs(e1 - e0) / e0)
    return [_at_most("10b", "entropy SL(2) invariance, max rel err", worst, 1e-6, "3 bodies x 5 maps")]


def c11_monge_ampere_ellipses():
    worst = 0.0
    for a, b, rot in [(2, 0.5, 0), (3, 1, 0.4), (1, 1, 0), (1.3, 0.7, 1.1)]:
        worst = max(worst, D.monge_ampere_residual(make_ellipse(a, b, rot), zeta=(a * b) ** (2 / 3)))
    return [_at_most("11a", "Monge-Ampere residual on ellipses", worst, 1e-8)]


def c11_monge_ampere_limit():
    rows = []
    for seed in CORPUS_SEEDS:
        nb = normalized_view(random_run(seed).last_body)
        framed = apply_linear_map(nb, D.sl2_frame(nb).phi)
        rows.append(_at_most(f"11b.{seed}", f"seed {seed}: residual of framed normalized final body",
                             D.monge_ampere_residual(framed), 1e-2))
    return rows


def c12_oracle():
    corpus = [make_ellipse(2, 0.5), make_ellipse(3, 1, 0.4), make_disk()] + [make_random_body(s) for s in CORPUS_SEEDS]
    worst = 0.0
    for body in corpus:
        a_poly, a_star_poly = polygon_oracle(body, 16 * body.n)
        worst = max(worst, abs(a_poly / area(body) - 1), abs(a_star_poly / polar_area(body) - 1))
    return [_at_most("12", "spectral vs polygon oracle, max rel diff", worst, 1e-4, f"{len(corpus)} bodies")]


def entropy_consistency():
    errs = fine_random_run().entropy_errors
    return [_at_most("E", f"d/dt Omega_2^-4 = {D.ENTROPY_DELTA:g} dlnA/dt entropy", errs.max(), 5e-2)]


SUITES = {
    "exact-solutions": [c01_disk_extinction, c02_scaled_disk, c03_ellipse_self_similarity, c09_ancient,
                        c10_entropy_zero, c11_monge_ampere_ellipses],
    "identities": [c04_area_rate, c05_sigma_evolution, c06_omega_l_rate, entropy_consistency,
                   c10_entropy_invariance, c12_oracle],
    "monotonicity": [c07_monotonicity, c08_harnack],
    "convergence": [c07_convergence, c11_monge_ampere_limit],
}
SUITES["all"] = [c for name in ("exact-solutions", "identities", "monotonicity", "convergence") for c in SUITES[name]]


def run_suite(name):
    if name not in SUITES:
        raise KeyError(name)
    return [row for check in SUITES[name] for row in check()]
