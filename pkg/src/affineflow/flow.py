"""Affine normal flow in support-function form: ds/dt = -r^(-1/3) at fixed normal angle.

Integration is explicit RK4 with a parabolic stability bound taken from the
linearisation ds/dt ~ (1/3) r^(-4/3) (d^2/dtheta^2 + 1) s. The flow is run
unnormalised until the area drops below a floor; the area-pi normalisation
is a view.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics
from .body import ConvexBody, NonConvexError, OriginNotInteriorError, area, p_affine_perimeter, polar_area, scale, translate
from .spectral import radius_operator

log = logging.getLogger(__name__)

RUNNING = "running"
EXTINCT = "extinct"
FAILED = "failed"

RK4_REAL_AXIS = 2.785  # RK4 stability interval on the negative real axis


@dataclass(frozen=True)
class StepController:
    safety: float = 0.5
    dt_max: float = 1e-2
    area_floor: float = 1e-4
    max_halvings: int = 20

    def __post_init__(self):
        if not 0.0 < self.safety <= 1.0:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if self.dt_max <= 0 or self.area_floor <= 0:
            raise ValueError("dt_max and area_floor must be positive")

    def stable_dt(self, r):
        n = r.size
        dtheta = 2.0 * np.pi / n
        return min(self.safety * 1.5 * dtheta**2 * float(r.min()) ** (4.0 / 3.0), self.dt_max)


@dataclass(frozen=True)
class FlowState:
    t: float
    body: ConvexBody
    dt_last: float = 0.0
    status: str = RUNNING
    t_extinct: float = None
    reason: str = None
    t0: float = 0.0
    steps: int = 0

    @property
    def running(self):
        return self.status == RUNNING


@dataclass(frozen=True)
class FunctionalRecord:
    t: float
    A: float
    A_star: float
    omega1: float
    omega2: float
    sigma_min: float
    sigma_max: float
    santalo: float
    aff_iso: float
    entropy: float
    harnack_min: float
    dt: float

    def __post_init__(self):
        vals = [getattr(self, f) for f in self.__dataclass_fields__]
        if not all(np.isfinite(vals)):
            raise ValueError(f"non-finite functional record at t={self.t}")


CSV_COLUMNS = tuple(FunctionalRecord.__dataclass_fields__)


def flow_rhs(body):
    return -1.0 / np.cbrt(body.r)


def _rhs(s):
    return -1.0 / np.cbrt(radius_operator(s))


def _rk4(s, dt):
    k1 = _rhs(s)
    k2 = _rhs(s + 0.5 * dt * k1)
    k3 = _rhs(s + 0.5 * dt * k2)
    k4 = _rhs(s + dt * k3)
    return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state, ctrl, dt_cap=None):
    """One RK4 step; halves dt on a failed convexity gate, up to ``ctrl.max_halvings`` times."""
    if not state.running:
        raise ValueError(f"cannot step a {state.status} flow")
    body = state.body
    dt = ctrl.stable_dt(body.r)
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    for _ in range(ctrl.max_halvings + 1):
        s_new = _rk4(body.s, dt)
        if not np.all(np.isfinite(s_new)):
            return replace(state, status=FAILED, reason="NonFinite")
        try:
            new_body = ConvexBody.from_samples(s_new, r_floor=body.r_floor)
        except (NonConvexError, OriginNotInteriorError) as exc:
            log.debug("gate failed at t=%g dt=%g: %s", state.t, dt, exc)
            dt *= 0.5
            continue
        return replace(state, t=state.t + dt, body=new_body, dt_last=dt, steps=state.steps + 1)
    return replace(state, status=FAILED, reason="StepCollapse")


def extinction_estimate(t, body):
    """Extinction time from the current area and dA/dt = -Omega_1.

    Extrapolates A^(2/3) linearly, which is exact for ellipses (A ~ (T-t)^(3/2))
    and hence asymptotically exact for every body.
    """
    return t + 1.5 * area(body) / p_affine_perimeter(body, 1)


def make_record(state):
    b = state.body
    a = area(b)
    a_star = polar_area(b)
    om1 = p_affine_perimeter(b, 1)
    harnack = diagnostics.harnack_quantity(state, state.t0) if state.t > state.t0 else np.zeros(b.n)
    return FunctionalRecord(
        t=state.t,
        A=a,
        A_star=a_star,
        omega1=om1,
        omega2=p_affine_perimeter(b, 2),
        sigma_min=float(b.sigma.min()),
        sigma_max=float(b.sigma.max()),
        santalo=a * a_star / np.pi**2,
        aff_iso=om1**3 / (8.0 * np.pi**2 * a),
        entropy=diagnostics.entropy_functional(b),
        harnack_min=float(harnack.min()),
        dt=state.dt_last,
    )


@dataclass
class SnapshotMonitor:
    """Keeps (t, support samples) at every record time."""

    times: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def __call__(self, state):
        self.times.append(state.t)
        self.samples.append(state.body.s)

    def bodies(self):
        return [ConvexBody.from_samples(s) for s in self.samples]

    def states(self, t0=0.0):
        return [FlowState(t=t, body=b, t0=t0) for t, b in zip(self.times, self.bodies())]


def run(body, ctrl=None, monitors=(), record_every=1, t0=0.0, t_end=None, max_steps=None, records=True):
    """Evolve ``body`` until its area reaches ``ctrl.area_floor`` (or ``t_end``).

    Returns the recorded trajectory and the final state. A record is taken at
    the start, every ``record_every`` accepted steps, and at the final state.
    Monitors are called with the state at each record time.
    """
    ctrl = ctrl or StepController()
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    state = FlowState(t=t0, body=body, t0=t0)
    trajectory = []

    def emit(st):
        if records:
            trajectory.append(make_record(st))
        for m in monitors:
            m(st)

    emit(state)
    last_emitted = 0
    while True:
        if area(state.body) <= ctrl.area_floor:
            state = replace(state, status=EXTINCT, t_extinct=extinction_estimate(state.t, state.body))
            break
        if t_end is not None and state.t >= t_end:
            break
        if max_steps is not None and state.steps >= max_steps:
            break
        cap = None if t_end is None else t_end - state.t
        state = step(state, ctrl, dt_cap=cap)
        if not state.running:
            log.warning("flow failed at t=%g: %s", state.t, state.reason)
            return trajectory, state
        if state.steps % record_every == 0:
            emit(state)
            last_emitted = state.steps
    if last_emitted != state.steps:
        emit(state)
    return trajectory, state


def normalized_view(state_or_body):
    body = getattr(state_or_body, "body", state_or_body)
    return scale(body, np.sqrt(np.pi / area(body)))


def limit_point(body, ctrl=None, floor_factor=1e-2, recenter_every=25):
    """Point the flow of ``body`` shrinks to.

    The support-function flow commutes with translations exactly (they only
    touch the first harmonic, which r ignores), so the body is kept centred at
    its centroid while flowing, and the accumulated shift is returned. The
    run goes to ``floor_factor`` times the controller's area floor.
    """
    ctrl = ctrl or StepController()
    inner = replace(ctrl, area_floor=ctrl.area_floor * floor_factor)
    state = FlowState(t=0.0, body=body)
    shift = np.zeros(2)
    while area(state.body) > inner.area_floor:
        if state.steps % recenter_every == 0:
            c = diagnostics.centroid(state.body)
            shift += c
            state = replace(state, body=translate(state.body, -c))
        state = step(state, inner)
        if not state.running:
            raise RuntimeError(f"flow failed while locating the limit point: {state.reason}")
    return shift + diagnostics.centroid(state.body)


def center_at_limit(body, ctrl=None):
    """Translate ``body`` so that its flow shrinks to the origin."""
    return translate(body, -limit_point(body, ctrl))
