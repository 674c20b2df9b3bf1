"""Monitors and checks for the affine normal flow.

Pointwise quantities (Harnack expressions, sigma time derivatives) are
evaluated at fixed grid index, i.e. at fixed normal angle, which is also what
the flow holds fixed.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .body import LinearMap, affine_iso_ratio, area, p_affine_perimeter, polar_area
from .spectral import spectral_derivative, trapezoid

MONOTONE_UP = "monotone_up"
MONOTONE_DOWN = "monotone_down"
BOUNDED = "bounded"
VIOLATED = "violated"

# d/dt Omega_2^-4 = ENTROPY_DELTA * (d/dt ln A) * entropy. From the l = 2 rate
# dOmega_2/dt = (3/4) int sigma^(-5/2) sigma_s^2 = 12 int ((sigma^(-1/4))_s)^2 and
# dA/dt = -Omega_1: -4 * 12 * Omega_2^-5 * J = delta * (-Omega_1 / A) * (A / (Omega_1 Omega_2^5)) J.
ENTROPY_DELTA = 48.0


class FrameFailure(ValueError):
    pass


@dataclass
class MonitorReport:
    name: str
    samples: list
    verdict: str
    tolerance: float
    violations: list = field(default_factory=list)
    samples_ref: str = None

    @property
    def ok(self):
        return self.verdict != VIOLATED

    @property
    def worst(self):
        return max((m for _, m in self.violations), default=0.0)

    def to_dict(self):
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "violations": [{"t": t, "magnitude": m} for t, m in self.violations],
            "samples_ref": self.samples_ref,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def monotone_report(name, times, values, direction, tol):
    """Classify a sampled series as monotone within ``tol`` per step.

    ``direction`` is "up", "down" or "strict_down" (any non-negative step
    violates). Violations carry the later time of the offending step and the
    size of the wrong-way move.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    d = np.diff(values)
    if direction == "up":
        bad = d < -tol
        mags = -d
    elif direction == "down":
        bad = d > tol
        mags = d
    elif direction == "strict_down":
        bad = d >= 0.0
        mags = d
    else:
        raise ValueError(f"unknown direction {direction!r}")
    violations = [(float(times[i + 1]), float(mags[i])) for i in np.flatnonzero(bad)]
    if violations:
        verdict = VIOLATED
    else:
        verdict = MONOTONE_UP if direction == "up" else MONOTONE_DOWN
    return MonitorReport(name, list(zip(times.tolist(), values.tolist())), verdict, tol, violations)


def bounded_report(name, times, values, bound):
    values = np.asarray(values, dtype=float)
    violations = [(float(t), float(v)) for t, v in zip(times, values) if not (np.isfinite(v) and v <= bound)]
    verdict = VIOLATED if violations else BOUNDED
    return MonitorReport(name, list(zip(list(map(float, times)), values.tolist())), verdict, bound, violations)


def monotone_monitors(trajectory, tol=1e-7, sigma_ratio_bound=None):
    """Monitor reports for the monotone quantities along a recorded trajectory.

    Covers Omega_1^3/A and A A* (non-decreasing), A (strictly decreasing),
    the normalised perimeters pi^(1/3) Omega_1 / A^(1/3) and Omega_2
    (non-decreasing), and sigma_max/sigma_min (bounded, by default by its
    largest observed value being finite).
    """
    if len(trajectory) < 2:
        raise ValueError("monotone monitors need at least two records")
    t = [r.t for r in trajectory]
    a = np.array([r.A for r in trajectory])
    om1 = np.array([r.omega1 for r in trajectory])
    ratio = np.array([r.sigma_max / r.sigma_min for r in trajectory])
    bound = np.inf if sigma_ratio_bound is None else sigma_ratio_bound
    return [
        monotone_report("aff_iso", t, [r.aff_iso for r in trajectory], "up", tol),
        monotone_report("santalo", t, [r.santalo for r in trajectory], "up", tol),
        monotone_report("area", t, a, "strict_down", 0.0),
        monotone_report("omega1_normalized", t, np.pi ** (1 / 3) * om1 / np.cbrt(a), "up", tol),
        monotone_report("omega2", t, [r.omega2 for r in trajectory], "up", tol),
        bounded_report("sigma_ratio", t, ratio, bound),
    ]


def harnack_quantity(state, t0):
    if not state.t > t0:
        raise ValueError(f"Harnack quantity needs t > t0 (t={state.t}, t0={t0})")
    return (state.t - t0) ** 0.25 / np.cbrt(state.body.r)


def ancient_harnack_quantity(state):
    body = getattr(state, "body", state)
    return 1.0 / (np.cbrt(body.r) * body.s)


def pointwise_monotone_report(name, times, fields, tol):
    """Per-grid-point forward differences of a sequence of fields must stay >= -tol."""
    fields = np.asarray(fields)
    d = np.diff(fields, axis=0)
    worst = d.min(axis=1)
    violations = [(float(times[i + 1]), float(-worst[i])) for i in np.flatnonzero(worst < -tol)]
    samples = list(zip(map(float, times[1:]), worst.tolist()))
    return MonitorReport(name, samples, VIOLATED if violations else MONOTONE_UP, tol, violations)


def harnack_check(states, t0, tol=1e-6):
    states = [s for s in states if s.t > t0]
    fields = [harnack_quantity(s, t0) for s in states]
    return pointwise_monotone_report("harnack", [s.t for s in states], fields, tol)


def ancient_harnack_check(states, tol=1e-6):
    fields = [ancient_harnack_quantity(s) for s in states]
    return pointwise_monotone_report("ancient_harnack", [s.t for s in states], fields, tol)


def arclength_derivative(body, f):
    """d f / d(affine arclength) = g^-1 d f / d theta."""
    return spectral_derivative(f, 1) / body.g


def sigma_ss(body):
    return arclength_derivative(body, arclength_derivative(body, body.sigma))


def sigma_rate(body):
    """Right-hand side of the sigma evolution: -4/3 + sigma_ss / 3."""
    return -4.0 / 3.0 + sigma_ss(body) / 3.0


def entropy_functional(body):
    """(A / (Omega_1 Omega_2^5)) * int ((sigma^(-1/4))_s)^2 ds; GL(2)-invariant, zero on ellipses."""
    d = spectral_derivative(body.sigma**-0.25, 1)
    integral = trapezoid(d**2 / body.g)
    om1 = p_affine_perimeter(body, 1)
    om2 = p_affine_perimeter(body, 2)
    return area(body) / (om1 * om2**5) * integral


def omega_l_rate(body, l):
    """Predicted dOmega_l/dt for l >= 2, returned with the coefficient of its first integral."""
    if l < 2:
        raise ValueError(f"the Omega_l rate formula needs l >= 2, got {l}")
    q = 3.0 * l / (l + 2.0)
    coeff1 = 2.0 * (l - 2.0) / (l + 2.0)
    coeff2 = 6.0 * l / (l + 2.0) ** 2
    sig = body.sigma
    ds_sigma = arclength_derivative(body, sig)
    first = trapezoid(sig**-q * body.g) if coeff1 != 0.0 else 0.0
    second = trapezoid(sig ** (-1.0 - q) * ds_sigma**2 * body.g)
    return coeff1 * first + coeff2 * second, coeff1


def _pairs(times, bodies):
    return zip(times[:-1], times[1:], bodies[:-1], bodies[1:])


def omega_l_derivative_check(times, bodies, l, tol=1e-2, noise=64.0):
    """Finite-difference dOmega_l/dt against the closed-form rate.

    Each recorded interval compares (Omega(t2) - Omega(t1)) / (t2 - t1) with
    the mean of the predicted rate at both ends. The magnitude is the error
    relative to the predicted rate, floored at the rounding resolution of the
    difference quotient, ``noise * eps * Omega / dt``. Samples are
    (t_mid, fd, predicted, magnitude).
    """
    eps = np.finfo(float).eps
    samples, violations = [], []
    for t1, t2, b1, b2 in _pairs(times, bodies):
        dt = t2 - t1
        om1, om2 = p_affine_perimeter(b1, l), p_affine_perimeter(b2, l)
        fd = (om2 - om1) / dt
        pred = 0.5 * (omega_l_rate(b1, l)[0] + omega_l_rate(b2, l)[0])
        floor = noise * eps * max(abs(om1), abs(om2)) / dt
        mag = abs(fd - pred) / max(abs(pred), floor)
        tm = 0.5 * (t1 + t2)
        samples.append((tm, fd, pred, mag))
        if mag > tol:
            violations.append((tm, mag))
    verdict = VIOLATED if violations else BOUNDED
    return MonitorReport(f"omega_{l:g}_rate", samples, verdict, tol, violations)


def area_rate_errors(trajectory):
    """Relative error of Delta A / Delta t against -Omega_1 (endpoint mean) per interval."""
    errs = []
    for r1, r2 in zip(trajectory[:-1], trajectory[1:]):
        om = 0.5 * (r1.omega1 + r2.omega1)
        errs.append(abs((r2.A - r1.A) / (r2.t - r1.t) + om) / om)
    return np.array(errs)


def sigma_evolution_residuals(times, bodies):
    """Max-norm residual of the sigma evolution per recorded interval."""
    out = []
    for t1, t2, b1, b2 in _pairs(times, bodies):
        fd = (b2.sigma - b1.sigma) / (t2 - t1)
        pred = 0.5 * (sigma_rate(b1) + sigma_rate(b2))
        out.append(float(np.max(np.abs(fd - pred))))
    return np.array(out)


def sigma_time_derivatives(times, bodies):
    return [(b2.sigma - b1.sigma) / (t2 - t1) for t1, t2, b1, b2 in _pairs(times, bodies)]


def entropy_consistency_errors(times, bodies, noise=64.0):
    """Relative error of d/dt Omega_2^-4 against ENTROPY_DELTA * (d/dt ln A) * entropy.

    Floored at the rounding resolution of the difference quotient, as in
    :func:`omega_l_derivative_check`.
    """
    eps = np.finfo(float).eps
    errs = []
    for t1, t2, b1, b2 in _pairs(times, bodies):
        dt = t2 - t1
        q1, q2 = p_affine_perimeter(b1, 2) ** -4, p_affine_perimeter(b2, 2) ** -4
        lhs = (q2 - q1) / dt
        dlog_a = (np.log(area(b2)) - np.log(area(b1))) / dt
        rhs = ENTROPY_DELTA * dlog_a * 0.5 * (entropy_functional(b1) + entropy_functional(b2))
        floor = noise * eps * max(q1, q2) / dt
        errs.append(abs(lhs - rhs) / max(abs(rhs), floor))
    return np.array(errs)


def _boundary_weights(body):
    pts = body.boundary()
    return pts, body.s * body.r


def moment_matrix(body):
    """Area moment int_K x x^T dx, via (1/4) int_dK x x^T (x . n) ds."""
    pts, w = _boundary_weights(body)
    return 0.25 * 2.0 * np.pi * np.einsum("j,ja,jb->ab", w, pts, pts) / body.n


def centroid(body):
    """(1 / A) int_K x dx, via (1 / 3A) int_dK x (x . n) ds."""
    pts, w = _boundary_weights(body)
    return 2.0 * np.pi * (w @ pts) / body.n / (3.0 * area(body))


@dataclass(frozen=True)
class Frame:
    phi: LinearMap
    moment_matrix: np.ndarray


def sl2_frame(body, max_condition=1e8):
    """SL(2) map sending the body's moment (Legendre) ellipse to a disk."""
    m = moment_matrix(body)
    w, v = np.linalg.eigh(m)
    if w.min() <= 0 or w.max() / w.min() > max_condition:
        raise FrameFailure(f"degenerate moment matrix, eigenvalues {w}")
    inv_sqrt = (v / np.sqrt(w)) @ v.T
    phi = np.sqrt(np.sqrt(w.prod())) * inv_sqrt
    # det is 1 up to rounding; renormalise so the SL(2) flag holds to 1e-12
    return Frame(LinearMap.to_special(phi), m)


def fit_ellipse(body):
    """Least-squares origin-centred ellipse through s^2 = z^T Q z.

    Returns (a, b, rotation, max |s - s_fit|).
    """
    th = body.theta
    basis = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    c, *_ = np.linalg.lstsq(basis, body.s**2, rcond=None)
    q = np.array([[c[0] + c[1], c[2]], [c[2], c[0] - c[1]]])
    w, v = np.linalg.eigh(q)
    a, b = np.sqrt(w[1]), np.sqrt(w[0])
    rot = float(np.arctan2(v[1, 1], v[0, 1]))
    fit = np.sqrt(np.clip(basis @ c, 0.0, None))
    return float(a), float(b), rot, float(np.max(np.abs(body.s - fit)))


def monge_ampere_residual(body, zeta=None):
    """max_j |s^3 r - zeta^3| / zeta^3, with zeta^3 defaulting to the grid mean of s^3 r."""
    lhs = body.s**3 * body.r
    zeta3 = lhs.mean() if zeta is None else zeta**3
    return float(np.max(np.abs(lhs - zeta3)) / zeta3)


def ellipticity(body):
    return 1.0 - affine_iso_ratio(body, 1, normalized=True)


def santalo_product(body):
    return area(body) * polar_area(body)


class StreamingPointwiseCheck:
    """Running pointwise forward-difference check, keeping only the previous field.

    ``quantity(state)`` returns a grid field, or None to skip the state.
    After the run, ``report()`` gives the same verdict as
    :func:`pointwise_monotone_report` on the full sequence.
    """

    def __init__(self, name, quantity, tol):
        self.name = name
        self.quantity = quantity
        self.tol = tol
        self._prev = None
        self.samples = []
        self.violations = []

    def __call__(self, state):
        f = self.quantity(state)
        if f is None:
            return
        if self._prev is not None:
            worst = float((f - self._prev).min())
            self.samples.append((float(state.t), worst))
            if worst < -self.tol:
                self.violations.append((float(state.t), -worst))
        self._prev = f

    @property
    def min_difference(self):
        return min((w for _, w in self.samples), default=0.0)

    def report(self):
        verdict = VIOLATED if self.violations else MONOTONE_UP
        return MonitorReport(self.name, self.samples, verdict, self.tol, list(self.violations))


def streaming_harnack(t0=0.0, tol=1e-6):
    return StreamingPointwiseCheck(
        "harnack", lambda st: harnack_quantity(st, t0) if st.t > t0 else None, tol)


def streaming_ancient_harnack(tol=1e-6):
    return StreamingPointwiseCheck("ancient_harnack", ancient_harnack_quantity, tol)


class SigmaRateMonitor:
    """Largest pointwise d sigma / dt between consecutive states (finite differences)."""

    def __init__(self):
        self._prev = None
        self.max_rate = -np.inf

    def __call__(self, state):
        if self._prev is not None:
            t1, sig1 = self._prev
            rate = (state.body.sigma - sig1) / (state.t - t1)
            self.max_rate = max(self.max_rate, float(rate.max()))
        self._prev = (state.t, state.body.sigma)
