"""Convex bodies stored as sampled support functions, and their affine functionals.

A body K is represented only by s(theta_j) on the uniform grid. Everything
else (radius of curvature, affine support function, boundary points) is
derived. All quadratures are uniform trapezoid sums, which are spectrally
accurate for smooth periodic integrands.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectral import grid, radius_operator, resample, spectral_derivative, trapezoid, trig_interpolate

DEFAULT_N = 256
R_FLOOR = 1e-6
RNG_ALGORITHM = "numpy.random.PCG64"


class NonConvexError(ValueError):
    """Radius of curvature fell to or below the convexity floor."""

    def __init__(self, min_value, index):
        self.min_value = float(min_value)
        self.index = int(index)
        super().__init__(f"radius of curvature {self.min_value:.3e} at grid index {self.index}")


class OriginNotInteriorError(ValueError):
    """Support function is not strictly positive, so the origin is not interior."""

    def __init__(self, min_value, index):
        self.min_value = float(min_value)
        self.index = int(index)
        super().__init__(f"support value {self.min_value:.3e} at grid index {self.index}")


def _is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SupportFunction:
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("support samples must be a 1-d vector")
        n = s.size
        if not _is_power_of_two(n) or n < 64:
            raise ValueError(f"grid size must be a power of two >= 64, got {n}")
        if not np.all(np.isfinite(s)):
            raise ValueError(f"non-finite support value at index {np.flatnonzero(~np.isfinite(s))[0]}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def n(self):
        return self.samples.size

    @property
    def theta(self):
        return grid(self.n)


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A smooth strictly convex body with the origin in its interior.

    Derived fields are computed once on construction, so instances can be
    shared freely. ``r`` is the radius of curvature, ``sigma`` the affine
    support function and ``g`` the affine arclength density r^(2/3).
    """

    support: SupportFunction
    r_floor: float = R_FLOOR
    r: np.ndarray = field(init=False, repr=False)
    sigma: np.ndarray = field(init=False, repr=False)
    g: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = self.support.samples
        r = radius_operator(s)
        j = int(np.argmin(r))
        if not r[j] > self.r_floor:
            raise NonConvexError(r[j], j)
        j = int(np.argmin(s))
        if not s[j] > 0.0:
            raise OriginNotInteriorError(s[j], j)
        g = r ** (2.0 / 3.0)
        sigma = s * np.cbrt(r)
        for name, arr in (("r", r), ("g", g), ("sigma", sigma)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_samples(cls, samples, r_floor=R_FLOOR):
        return cls(SupportFunction(samples), r_floor=r_floor)

    @property
    def s(self):
        return self.support.samples

    @property
    def n(self):
        return self.support.n

    @property
    def theta(self):
        return self.support.theta

    @property
    def area(self):
        return area(self)

    @property
    def polar_area(self):
        return polar_area(self)

    def boundary(self):
        """Boundary points gamma(theta_j) = s z + s_theta z_theta, shape (N, 2)."""
        return _boundary_points(self.s, spectral_derivative(self.s, 1), self.theta)

    def __repr__(self):
        return f"ConvexBody(n={self.n}, area={self.area:.6g})"


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray
    special: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float).reshape(2, 2)
        det = float(np.linalg.det(m))
        if det == 0.0 or not np.isfinite(det):
            raise ValueError("linear map is singular")
        if self.special and abs(det - 1.0) > 1e-12:
            raise ValueError(f"SL(2) map has determinant {det!r}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    @classmethod
    def identity(cls):
        return cls(np.eye(2), special=True)

    @classmethod
    def to_special(cls, matrix):
        """Rescale an invertible 2x2 matrix with positive determinant into SL(2)."""
        m = np.array(matrix, dtype=float)
        det = np.linalg.det(m)
        if det <= 0:
            raise ValueError("need a positive determinant to rescale into SL(2)")
        return cls(m / np.sqrt(det), special=True)


def _boundary_points(s, s_theta, theta):
    c, sn = np.cos(theta), np.sin(theta)
    x = s * c - s_theta * sn
    y = s * sn + s_theta * c
    return np.column_stack([x, y])


def radius_of_curvature(body):
    return body.r


def affine_support(body):
    return body.sigma


def area(body):
    return 0.5 * trapezoid(body.s * body.r)


def polar_area(body):
    return 0.5 * trapezoid(body.s**-2.0)


def p_affine_perimeter(body, p):
    """Integral of sigma^(1 - 3p/(p+2)) against affine arclength."""
    if p < 1:
        raise ValueError(f"p-affine perimeter needs p >= 1, got {p}")
    expo = 1.0 - 3.0 * p / (p + 2.0)
    if expo == 0.0:
        return trapezoid(body.g)
    return trapezoid(body.sigma**expo * body.g)


def affine_iso_ratio(body, p=1.0, normalized=False):
    """Omega_p^(2+p) / A^(2-p); with ``normalized`` (p = 1 only) returns Omega_1^3 / (8 pi^2 A)."""
    omega = p_affine_perimeter(body, p)
    a = area(body)
    if normalized:
        if p != 1:
            raise ValueError("the normalized ratio is defined for p = 1")
        return omega**3 / (8.0 * np.pi**2 * a)
    return omega ** (2.0 + p) / a ** (2.0 - p)


def scale(body, lam):
    return ConvexBody.from_samples(lam * body.s, r_floor=body.r_floor)


def translate(body, v):
    """Body K + v; the support function gains <v, z>."""
    th = body.theta
    return ConvexBody.from_samples(body.s + v[0] * np.cos(th) + v[1] * np.sin(th), r_floor=body.r_floor)


def support_of_image(s, matrix, theta):
    """Support function of Phi K at directions theta, with s_K given on its grid."""
    z = np.stack([np.cos(theta), np.sin(theta)])
    w = np.asarray(matrix).T @ z
    return np.hypot(w[0], w[1]) * trig_interpolate(s, np.arctan2(w[1], w[0]))


def apply_linear_map(body, phi):
    if not isinstance(phi, LinearMap):
        phi = LinearMap(phi)
    return ConvexBody.from_samples(support_of_image(body.s, phi.matrix, body.theta), r_floor=body.r_floor)


def make_ellipse(a, b, rotation=0.0, n=DEFAULT_N):
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    th = grid(n) - rotation
    return ConvexBody.from_samples(np.sqrt((a * np.cos(th)) ** 2 + (b * np.sin(th)) ** 2))


def make_disk(radius=1.0, n=DEFAULT_N):
    return ConvexBody.from_samples(np.full(n, float(radius)))


def random_perturbation(seed, max_harmonic, decay, n=DEFAULT_N):
    """Harmonics 2..max_harmonic with coefficients U(-1, 1) * k^-decay, seeded PCG64."""
    rng = np.random.Generator(np.random.PCG64(seed))
    th = grid(n)
    pert = np.zeros(n)
    for k in range(2, max_harmonic + 1):
        ak, bk = rng.uniform(-1.0, 1.0, size=2) * float(k) ** -decay
        pert += ak * np.cos(k * th) + bk * np.sin(k * th)
    return pert


def make_random_body(seed, max_harmonic=8, decay=2.0, amplitude=0.2, n=DEFAULT_N, halve=True,
                     min_radius=0.05, min_support=0.05):
    """Unit disk plus a seeded random perturbation, shrunk until convex enough.

    The perturbation is halved until min r >= ``min_radius`` and
    min s >= ``min_support``. With ``halve=False`` the first draw is taken
    as is, and the body constructor decides.
    """
    pert = amplitude * random_perturbation(seed, max_harmonic, decay, n)
    while halve:
        s = 1.0 + pert
        if radius_operator(s).min() >= min_radius and s.min() >= min_support:
            break
        pert = 0.5 * pert
    return ConvexBody.from_samples(1.0 + pert)


def shoelace(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_oracle(body, m):
    """Polygon areas of K and K* from M boundary samples.

    K is approximated by the inscribed polygon through gamma(theta_k). K* is
    approximated by the polar of the circumscribed polygon formed by the
    tangent lines <x, z_k> = s_k, whose vertices are z_k / s_k.
    """
    if m < body.n:
        raise ValueError(f"oracle needs M >= N ({m} < {body.n})")
    th = grid(m)
    if m % body.n == 0:
        s = resample(body.s, m)
        ds = resample(spectral_derivative(body.s, 1), m)
    else:
        s = trig_interpolate(body.s, th)
        ds = trig_interpolate(body.s, th, derivative=1)
    a_poly = shoelace(_boundary_points(s, ds, th))
    dual = np.column_stack([np.cos(th) / s, np.sin(th) / s])
    return a_poly, shoelace(dual)
