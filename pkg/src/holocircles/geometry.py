"""Complex curves in C^2 attached to circles, and the domain they sweep.

Points ``(z, w)`` of C^2 are tested against

* ``Lambda(a, R) = {(z - a)(w - conj(a)) = R^2, 0 < |z - a| < R}``,
* ``Omega = {|w| > |z|}``, the union of the ``Lambda`` over circles that
  surround the origin,
* the full quadric ``V(a, R) = {(z - a)(w - conj(a)) = R^2}`` and its four
  pieces over the plane regions ``D1 .. D4``.

``Sigma = {(z, conj(z))}`` is the real plane on which functions of ``z``
and ``conj(z)`` live.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .circles import Circle

__all__ = [
    "VarietyPoint", "Annulus", "RegionLabel", "GeometryError",
    "lambda_contains", "circle_through", "perpendicular_slice_center",
    "omega_contains", "halfplane_criterion", "omega_annulus_contains",
    "slab_containment_check", "region_classify", "identity_4_1_residual",
    "v_cap_bomega", "bomega_ray_roots", "verify_v_cap_bomega",
    "circle_intersections", "slice_parameter", "slice_point",
    "tangent_cosine", "v_component_membership", "deformation_boundary_check",
    "deformation_origin_check", "D1_boundary",
]

VARIETY_RTOL = 1e-10
BOUNDARY_BAND = 1e-12


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class VarietyPoint:
    z: complex
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", complex(self.w))

    @property
    def on_sigma(self) -> bool:
        return self.w == self.z.conjugate()

    @classmethod
    def on_variety(cls, z, a, rho) -> "VarietyPoint":
        """The point of ``V(a, rho)`` above ``z``."""
        z = complex(z)
        return cls(z, complex(a).conjugate() + rho ** 2 / (z - a))


@dataclass(frozen=True)
class Annulus:
    """``{r1 <= |zeta - center| <= r2}``."""

    center: complex
    r1: float
    r2: float

    def __post_init__(self):
        if not 0 < self.r1 < self.r2 < math.inf:
            raise ValueError("annulus radii must satisfy 0 < r1 < r2 < inf")

    @property
    def mid_radius(self) -> float:
        return 0.5 * (self.r1 + self.r2)


class RegionLabel(str, enum.Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    BOUNDARY = "boundary"


# ------------------------------------------------------------- Lambda / Omega

def lambda_contains(p: VarietyPoint, a: complex, R: float) -> bool:
    a = complex(a)
    lhs = (p.z - a) * (p.w - a.conjugate())
    d = abs(p.z - a)
    return abs(lhs - R * R) < VARIETY_RTOL * max(1.0, R * R) and 0 < d < R


def _off_sigma_gap(p: VarietyPoint) -> complex:
    gap = p.z - p.w.conjugate()
    if gap == 0:
        raise GeometryError("point lies on Sigma (w = conj(z))")
    return gap


def circle_through(p: VarietyPoint, R: float) -> complex:
    """Center ``a`` of the radius-``R`` circle whose curve contains ``p``.

    ``a = z + t (z - conj(w))`` with ``t = (sqrt(1 + 4R^2/|z - conj(w)|^2) - 1)/2``.
    """
    gap = _off_sigma_gap(p)
    q = 4.0 * R * R / abs(gap) ** 2
    # (sqrt(1+q) - 1)/2 without cancellation for small q
    t = 0.5 * q / (math.sqrt(1.0 + q) + 1.0)
    return p.z + t * gap


def slice_parameter(p: VarietyPoint, a: complex) -> float:
    """The ``t > 0`` with ``a = z + t (z - conj(w))``."""
    return abs(complex(a) - p.z) / abs(_off_sigma_gap(p))


def perpendicular_slice_center(z: complex, t: float, phi: float, R: float) -> complex:
    """Center ``a`` for which ``(z + t e^{i phi}, conj(z) - t e^{-i phi})``
    lies on the curve of the radius-``R`` circle."""
    if t <= 0:
        raise GeometryError("t must be positive")
    return complex(z) + math.sqrt(t * t + R * R) * complex(math.cos(phi), math.sin(phi))


def slice_point(z: complex, t: float, phi: float) -> VarietyPoint:
    e = complex(math.cos(phi), math.sin(phi))
    z = complex(z)
    return VarietyPoint(z + t * e, z.conjugate() - t * e.conjugate())


def omega_contains(p: VarietyPoint) -> bool:
    return abs(p.w) > abs(p.z)


def halfplane_criterion(z: complex, zeta: complex) -> bool:
    """Whether ``(z + zeta, conj(z) - conj(zeta))`` lies in ``Omega``,
    decided by the sign of ``Re(conj(z) zeta)``."""
    z = complex(z)
    if z == 0:
        raise GeometryError("z must be nonzero")
    return (z.conjugate() * complex(zeta)).real < 0


def omega_annulus_contains(p: VarietyPoint, A: Annulus) -> bool:
    """Membership in the union of the curves of circles inside ``A`` that
    surround its center.

    That union is the disjoint union of the curves of circles of radius
    ``gamma = (r1 + r2)/2``, so it suffices to find the one such circle
    through ``p`` and check where it sits.
    """
    gamma = A.mid_radius
    b = circle_through(p, gamma)
    d = abs(b - complex(A.center))
    return d < gamma and gamma - d > A.r1 and gamma + d < A.r2


def slab_containment_check(A: Annulus, delta: float, M: float, trials: int,
                           seed: int = 0) -> bool:
    """Sample ``|z| <= delta``, ``M <= |w| <= 10 M`` and test each point
    with :func:`omega_annulus_contains`."""
    if delta <= 0 or M <= 0:
        raise ValueError("delta and M must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        z = delta * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        w = M * rng.uniform(1.0, 10.0) * np.exp(2j * np.pi * rng.random())
        if not omega_annulus_contains(VarietyPoint(z, w), A):
            return False
    return True


# ---------------------------------------------------------- quadric V(a, r)

def _second_radius(a: complex, r: float) -> float:
    s2 = abs(a) ** 2 - r * r
    if s2 <= 0:
        raise GeometryError("requires |a| > r (circle must not surround "
                            "or pass through the origin)")
    return math.sqrt(s2)


def region_classify(z: complex, a: complex, r: float) -> RegionLabel:
    a, z = complex(a), complex(z)
    s = _second_radius(a, r)
    d_a, d_0 = abs(z - a), abs(z)
    band = BOUNDARY_BAND * max(1.0, abs(a))
    if abs(d_a - r) <= band or abs(d_0 - s) <= band:
        return RegionLabel.BOUNDARY
    in_a, in_0 = d_a < r, d_0 < s
    if in_a and in_0:
        return RegionLabel.D1
    if not in_a and not in_0:
        return RegionLabel.D2
    return RegionLabel.D3 if in_0 else RegionLabel.D4


def identity_4_1_residual(z: complex, a: complex, rho: float,
                          relative: bool = False) -> float:
    """``|z-a|^2 (|conj(a) + rho^2/(z-a)|^2 - |z|^2)`` minus its factored form
    ``(|a|^2 - rho^2 - |z|^2)(|z-a|^2 - rho^2)``."""
    z, a = complex(z), complex(a)
    if z == a:
        raise GeometryError("z must differ from a")
    za2 = abs(z - a) ** 2
    w = a.conjugate() + rho * rho / (z - a)
    lhs = za2 * (abs(w) ** 2 - abs(z) ** 2)
    f1 = abs(a) ** 2 - rho * rho - abs(z) ** 2
    f2 = za2 - rho * rho
    res = abs(lhs - f1 * f2)
    if relative:
        scale = za2 * (abs(w) ** 2 + abs(z) ** 2) + abs(f1 * f2)
        return res / max(scale, 1e-300)
    return res


def v_cap_bomega(a: complex, rho: float) -> list[Circle]:
    """Circles over which ``V(a, rho)`` meets ``|w| = |z|``."""
    a = complex(a)
    if math.isclose(abs(a), rho, rel_tol=1e-14):
        raise GeometryError("|a| = rho: degenerate case (circle through the "
                            "origin) is not handled")
    if abs(a) < rho:
        return [Circle(a, rho)]
    return [Circle(a, rho), Circle(0, _second_radius(a, rho))]


def _bomega_gap(z, a, rho):
    return abs(a.conjugate() + rho * rho / (z - a)) - abs(z)


def bomega_ray_roots(a: complex, rho: float, directions: int = 720,
                     samples: int = 4000) -> list[complex]:
    """All sign-change roots of ``|conj(a) + rho^2/(z-a)| = |z|`` along
    ``directions`` rays from the origin, polished with Brent's method."""
    a = complex(a)
    r_max = 2.0 * (abs(a) + rho) + 1.0
    radii = np.linspace(0.0, r_max, samples + 1)[1:]
    roots = []
    for theta in np.arange(directions) * (2 * np.pi / directions):
        e = complex(math.cos(theta), math.sin(theta))
        zs = radii * e
        with np.errstate(all="ignore"):
            g = np.abs(a.conjugate() + rho * rho / (zs - a)) - radii
        finite = np.isfinite(g)
        sign = np.sign(g)
        idx = np.flatnonzero(finite[:-1] & finite[1:] & (sign[:-1] * sign[1:] < 0))
        for i in idx:
            lo, hi = radii[i], radii[i + 1]
            # skip brackets straddling the pole at z = a
            if abs(lo * e - a) < 1e-9 or abs(hi * e - a) < 1e-9:
                continue
            r = brentq(lambda x: _bomega_gap(x * e, a, rho), lo, hi,
                       xtol=1e-15, rtol=4 * np.finfo(float).eps)
            roots.append(r * e)
    return roots


def verify_v_cap_bomega(a: complex, rho: float, directions: int = 720
                        ) -> tuple[int, float]:
    """Count the ray-search roots and return the largest distance from a
    root to the nearest circle reported by :func:`v_cap_bomega`."""
    circles = v_cap_bomega(a, rho)
    roots = bomega_ray_roots(a, rho, directions)
    worst = 0.0
    for z in roots:
        d = min(abs(abs(z - c.center) - c.radius) for c in circles)
        worst = max(worst, d)
    return len(roots), worst


def circle_intersections(c1: Circle, c2: Circle) -> list[complex]:
    d = abs(c2.center - c1.center)
    if d == 0 or d > c1.radius + c2.radius or d < abs(c1.radius - c2.radius):
        return []
    u = (c2.center - c1.center) / d
    x = (d * d + c1.radius ** 2 - c2.radius ** 2) / (2 * d)
    h = math.sqrt(max(c1.radius ** 2 - x * x, 0.0))
    base = c1.center + x * u
    return [base + 1j * h * u, base - 1j * h * u]


def tangent_cosine(p: complex, c1: Circle, c2: Circle) -> float:
    """|cos| of the angle between the tangents of two circles at ``p``."""
    n1 = (p - c1.center) / abs(p - c1.center)
    n2 = (p - c2.center) / abs(p - c2.center)
    # tangents are the normals rotated by 90 degrees; the dot is unchanged
    return abs((n1.conjugate() * n2).real)


def v_component_membership(p: VarietyPoint, a: complex, r: float):
    """Which of ``V1 .. V4`` contains ``p``; ``None`` if ``p`` is off the
    quadric or over a bounding circle."""
    a = complex(a)
    _second_radius(a, r)
    residual = abs((p.z - a) * (p.w - a.conjugate()) - r * r)
    if residual > VARIETY_RTOL * max(1.0, r * r):
        return None
    label = region_classify(p.z, a, r)
    if label is RegionLabel.BOUNDARY or p.z == a:
        return None
    return "V" + label.value[1]


# ------------------------------------------------------- disc deformation

def D1_boundary(b: complex, r: float, samples: int = 2048) -> np.ndarray:
    """Points on the boundary of ``D1(b, r)``: the arc of ``|z - b| = r``
    inside ``|z| <= s`` followed by the arc of ``|z| = s`` inside
    ``|z - b| <= r``, ``s = sqrt(|b|^2 - r^2)``."""
    b = complex(b)
    s = _second_radius(b, r)
    beta = math.atan2(b.imag, b.real)
    # the two circles meet at angle +-psi seen from b and +-chi seen from 0
    psi = math.atan2(s, r)       # from b, measured off the direction -b
    chi = math.atan2(r, s)       # from 0, measured off the direction b
    half = samples // 2
    theta1 = beta + math.pi + np.linspace(-psi, psi, half)
    arc1 = b + r * np.exp(1j * theta1)
    theta2 = beta + np.linspace(chi, -chi, samples - half)
    arc2 = s * np.exp(1j * theta2)
    return np.concatenate([arc1, arc2])


@dataclass(frozen=True)
class DeformationCheck:
    all_in_omega: bool
    min_margin: float


def deformation_boundary_check(b: complex, r: float, t: float,
                               samples: int = 2048) -> DeformationCheck:
    """Sample the boundary of the disc ``{(t z, conj(b) + r^2/(z-b)) : z in D1}``
    and report whether it stays in ``Omega`` with its smallest margin
    ``|w| - |t z|``."""
    b = complex(b)
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    z = D1_boundary(b, r, samples)
    w = b.conjugate() + r * r / (z - b)
    margin = np.abs(w) - np.abs(t * z)
    m = float(margin.min())
    return DeformationCheck(all_in_omega=bool(m > 0), min_margin=m)


def deformation_origin_check(b: complex, r: float) -> bool:
    """Whether the disc at ``t = 0`` passes through the origin of C^2.

    ``w`` vanishes at ``z* = b - r^2/conj(b)``; the check is that ``z*``
    lies in the closure of ``D1(b, r)``.
    """
    b = complex(b)
    s = _second_radius(b, r)
    zs = b - r * r / b.conjugate()
    eps = 1e-12 * max(1.0, abs(b))
    return abs(zs - b) <= r + eps and abs(zs) <= s + eps
