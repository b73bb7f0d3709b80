"""Property suites run by the command line front end.

Each property draws its own random stream from one seed so that results do
not depend on which properties run or in which order.  A property reports
how many trials it made, the worst value observed and the tolerance it was
held to.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import characterize as ch
from . import geometry as geo
from .circles import Circle, extension_defect, rational_pole_scan
from .expr import parse, scale_invariance_check
from .geometry import Annulus, VarietyPoint

__all__ = ["PropertyResult", "geometry_suite", "characterize_suite",
           "GEOMETRY_PROPERTIES"]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    trials: int
    worst: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _rand_complex(rng, scale=2.0, size=None):
    return scale * (rng.uniform(-1, 1, size) + 1j * rng.uniform(-1, 1, size))


def _exterior_circle(rng):
    """Random ``(a, r)`` with ``|a| > r``."""
    r = rng.uniform(0.2, 2.0)
    a = r * rng.uniform(1.05, 4.0) * np.exp(2j * np.pi * rng.random())
    return complex(a), float(r)


# ------------------------------------------------------------ geometry

def _roundtrip(rng, trials, tol):
    worst, t_worst, bad = 0.0, 0.0, 0
    for _ in range(trials):
        z, w = _rand_complex(rng), _rand_complex(rng)
        p = VarietyPoint(z, w)
        R = rng.uniform(0.1, 3.0)
        a = geo.circle_through(p, R)
        res = abs((p.z - a) * (p.w - a.conjugate()) - R * R) / (R * R)
        t = geo.slice_parameter(p, a)
        gap = abs(p.z - p.w.conjugate()) ** 2
        t_res = abs(R * R - t * (t + 1) * gap) / (R * R)
        worst, t_worst = max(worst, res), max(t_worst, t_res)
        if not geo.lambda_contains(p, a, R):
            bad += 1
    return (worst <= tol and t_worst <= tol and bad == 0,
            max(worst, t_worst), f"lambda_contains failures: {bad}")


def _perpendicular(rng, trials, tol):
    worst, bad = 0.0, 0
    for _ in range(trials):
        z = _rand_complex(rng)
        t, phi, R = rng.uniform(0.01, 3.0), rng.uniform(0, 2 * np.pi), rng.uniform(0.1, 3.0)
        a = geo.perpendicular_slice_center(z, t, phi, R)
        p = geo.slice_point(z, t, phi)
        if not geo.lambda_contains(p, a, R):
            bad += 1
        worst = max(worst, abs(geo.circle_through(p, R) - a) / max(1.0, abs(a)))
    return worst <= tol and bad == 0, worst, f"lambda_contains failures: {bad}"


def _halfplane(rng, trials, tol):
    disagree = 0
    for _ in range(trials):
        z, zeta = _rand_complex(rng), _rand_complex(rng)
        if z == 0:
            continue
        p = VarietyPoint(z + zeta, z.conjugate() - zeta.conjugate())
        if geo.halfplane_criterion(z, zeta) != geo.omega_contains(p):
            disagree += 1
    return disagree == 0, float(disagree), "count of disagreements"


def _identity_4_1(rng, trials, tol):
    worst = 0.0
    for _ in range(trials):
        z, a = _rand_complex(rng, 3.0), _rand_complex(rng, 3.0)
        rho = rng.uniform(0.05, 3.0)
        worst = max(worst, geo.identity_4_1_residual(z, a, rho, relative=True))
    return worst <= tol, worst, "relative residual"


def _components(rng, trials, tol):
    bad, seen = 0, set()
    for _ in range(trials):
        a, r = _exterior_circle(rng)
        z = complex(_rand_complex(rng, abs(a) + 2 * r))
        if z == a:
            continue
        p = VarietyPoint.on_variety(z, a, r)
        label = geo.v_component_membership(p, a, r)
        if label is None:
            continue
        seen.add(label)
        inside = geo.omega_contains(p)
        if label in ("V3", "V4") and not inside:
            bad += 1
        if label in ("V1", "V2") and not abs(p.w) < abs(p.z):
            bad += 1
    return bad == 0, float(bad), "components seen: " + ",".join(sorted(seen))


def _factorization(rng, trials, tol):
    cases = min(trials, 50)
    worst, roots = 0.0, 0
    for _ in range(cases):
        a, r = _exterior_circle(rng)
        count, d = geo.verify_v_cap_bomega(a, r)
        roots += count
        worst = max(worst, d)
    return worst <= tol and roots > 0, worst, f"{cases} cases, {roots} roots"


def _right_angle(rng, trials, tol):
    cases = min(trials, 50)
    worst, points = 0.0, 0
    for _ in range(cases):
        a, r = _exterior_circle(rng)
        c1, c2 = geo.v_cap_bomega(a, r)
        for p in geo.circle_intersections(c1, c2):
            points += 1
            worst = max(worst, geo.tangent_cosine(p, c1, c2))
    return worst <= tol and points == 2 * cases, worst, f"{points} intersection points"


def _deformation(rng, trials, tol):
    margins = [geo.deformation_boundary_check(2.0, 1.0, t).min_margin
               for t in (0.0, 0.25, 0.5, 0.75, 0.99)]
    cases = min(trials, 100)
    origin_bad = 0
    for _ in range(cases):
        b, r = _exterior_circle(rng)
        if not geo.deformation_origin_check(b, r):
            origin_bad += 1
    ok = min(margins) > 0 and origin_bad == 0
    return ok, min(margins), f"origin check failures: {origin_bad} of {cases}"


def _annulus(rng, trials, tol):
    A = Annulus(0, 1, 3)
    ok = (geo.omega_annulus_contains(VarietyPoint(0, 4), A)
          and geo.omega_annulus_contains(VarietyPoint(0, 100), A)
          and geo.slab_containment_check(A, 0.05, 50, min(trials, 1000),
                                         seed=int(rng.integers(2 ** 31))))
    return ok, 0.0, "slab |z| <= 0.05, |w| >= 50 in A(0, 1, 3)"


# name -> (check, default tolerance)
GEOMETRY_PROPERTIES: dict[str, tuple[Callable, float]] = {
    "circle_through_roundtrip": (_roundtrip, 1e-10),
    "perpendicular_slice_consistency": (_perpendicular, 1e-10),
    "halfplane_slice_identity": (_halfplane, 0.0),
    "identity_4_1": (_identity_4_1, 1e-10),
    "component_consistency": (_components, 0.0),
    "v_cap_bomega_factorization": (_factorization, 1e-9),
    "right_angle_intersection": (_right_angle, 1e-9),
    "deformation_family": (_deformation, 0.0),
    "annulus_slab": (_annulus, 0.0),
}


def geometry_suite(trials: int = 1000, seed: int = 0, tol: float | None = None,
                   only=None) -> list[PropertyResult]:
    """Run every geometry property.

    ``tol`` overrides the per-property tolerances when given.  Properties
    that are counts of disagreements ignore it.
    """
    children = np.random.SeedSequence(seed).spawn(len(GEOMETRY_PROPERTIES))
    results = []
    for (name, (check, default)), child in zip(GEOMETRY_PROPERTIES.items(), children):
        if only is not None and name not in only:
            continue
        use = default if tol is None or default == 0.0 else tol
        ok, worst, detail = check(np.random.default_rng(child), trials, use)
        results.append(PropertyResult(name, bool(ok), trials, float(worst), use, detail))
    return results


# -------------------------------------------------------- characterize

def _row(name, value, threshold, passed, expect):
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "expect": expect, "passed": bool(passed)}


def _defect(f, center, radius, n=ch.DEFAULT_N):
    return extension_defect(f, Circle(center, radius), n)


def characterize_suite(seed: int = 0, scans: bool = True) -> list[dict]:
    """Reproduce the example functions and report one verdict row each."""
    rng = np.random.default_rng(seed)
    rows = []

    def expect_extends(name, f, center, radius, tol=1e-10):
        rep = _defect(f, center, radius)
        rows.append(_row(name, rep.defect, tol,
                         rep.defect < tol and rep.verdict == "extends", "extends"))

    def expect_fails(name, f, center, radius, threshold=0.01):
        rep = _defect(f, center, radius)
        rows.append(_row(name, rep.defect, threshold,
                         rep.defect > threshold and rep.verdict == "does_not_extend",
                         "does_not_extend"))

    f = parse("z^2/conj(z)")
    expect_extends("z^2/conj(z) on circle (0.3, 1)", f, 0.3, 1.0)
    expect_fails("z^2/conj(z) on circle (2, 1)", f, 2.0, 1.0)
    poles = rational_pole_scan(f, Circle(2.0, 1.0))
    err = min((abs(p - 1.5) for p in poles), default=math.inf)
    rows.append(_row("z^2/conj(z) pole inside circle (2, 1) at 1.5", err, 1e-6,
                     len(poles) == 1 and err < 1e-6, "one pole"))

    g7 = ch.example_7_vanishing(2.0, 1.0)
    expect_extends("example7(2,1) on circle (2, 1)", g7, 2.0, 1.0)
    expect_extends("example7(2,1) on circle (0.1+0.2i, 1)", g7, 0.1 + 0.2j, 1.0)
    expect_extends("example7(2,1) on circle (0.5i, 0.5) through 0", g7, 0.5j, 0.5)
    h7 = ch.example_7_product([(2.0, 1.0), (-3.0, 1.0)])
    for c, r in ((2.0, 1.0), (-3.0, 1.0), (0.2, 1.0), (0.5, 0.5)):
        expect_extends(f"example7product on circle ({c:g}, {r:g})", h7, c, r)
    expect_fails("example7product on circle (2, 0.3)", h7, 2.0, 0.3)

    for text in ("w", "w^2", "w^3+0.2*w"):
        fl = ch.line_constant_model(text)
        worst = 0.0
        for _ in range(5):
            r = rng.uniform(0.3, 3.0)
            a = r * 0.9 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            worst = max(worst, _defect(fl, complex(a), r).defect)
        rows.append(_row(f"g(z/conj(z)), g = {text}, circles around 0", worst, 1e-9,
                         worst < 1e-9, "extends"))
        res = ch.line_boundary_transport(text, 0.3, 1.0, 1024)
        rows.append(_row(f"line transport, g = {text}", res, 1e-13, res < 1e-13, "identity"))

    res = ch.mobius_identity_check(0.6)
    rows.append(_row("Mobius identity, a = 0.6", res, 1e-13, res < 1e-13, "identity"))
    res = ch.mobius_composite_residual(0.6)
    rows.append(_row("Mobius composite, a = 0.6", res, 1e-13, res < 1e-13, "identity"))
    t = ch.t_from_d(0.6)
    rows.append(_row("t_from_d(0.6) = 1/3", abs(t - 1 / 3), 1e-15,
                     abs(t - 1 / 3) < 1e-15, "identity"))

    f91 = ch.example_9_1(0.5)
    expect_extends("example9_1(0.5) on circle (0.5, 1)", f91, 0.5, 1.0)
    expect_extends("example9_1(0.5) on circle (-0.5, 1)", f91, -0.5, 1.0)
    expect_fails("example9_1(0.5) on circle (0.3, 1)", f91, 0.3, 1.0)
    tr = ch.ray_boundary_transport(0.0, 0.5, f91)
    err = float(np.max(np.abs(tr.values - tr.zeta)))
    rows.append(_row("example9_1(0.5) transported boundary equals zeta", err, 1e-12,
                     err < 1e-12, "identity"))

    f92 = ch.example_9_2("w^3")
    expect_extends("example9_2(w^3) on circle (0, 1)", f92, 0.0, 1.0)
    expect_fails("example9_2(w^3) on circle (0.4, 1)", f92, 0.4, 1.0, threshold=1e-4)
    try:
        ch.example_9_2("w^2")
        rejected = False
    except ValueError:
        rejected = True
    rows.append(_row("example9_2(w^2) rejected as even", 0.0, 0.0, rejected, "rejected"))

    for text, expected in (("w^2", 0.0), ("w", 1.0), ("w^2+0.5*w^3", math.sqrt(0.2))):
        e = ch.evenness_defect(text)
        rows.append(_row(f"evenness of {text}", e, expected,
                         abs(e - expected) < 1e-12, f"{expected:.6g}"))

    wit = ch.theorem_10_1_witness(ch.line_constant_model("w^2+w"),
                                  Circle(0.5, 1.0), Circle(0.3j, 1.0))
    rows.append(_row("two-circle witness on g(z/conj(z))", wit.evenness or 0.0, 1e-10,
                     wit.both_extend and wit.consistent, "even"))
    wit = ch.theorem_10_1_witness(f91, Circle(0.5, 1.0), Circle(0.3, 1.0))
    rows.append(_row("two-circle witness on example9_1(0.5)", wit.defect2, 1e-8,
                     wit.consistent and not wit.both_extend, "second circle fails"))

    chain = ch.substitution_chain(ch.MobiusParams(0.6, 0.4), ch.MobiusParams(0.3, -1.1))
    rows.append(_row("substitution chain with fitted C", chain.residual, 1e-11,
                     chain.residual < 1e-11, "closes"))
    rows[-1]["C"] = chain.to_dict()

    res = scale_invariance_check(f92, "ray")
    rows.append(_row("example9_2(w^3) constant on rays", res, 1e-12, res < 1e-12, "identity"))

    if scans:
        m = ch.defect_scan(f91, 1.0, "-0.9:0.9:-0.9:0.9:0.05", 2048)
        found = sorted(m.minima, key=lambda c: (c.real, c.imag))
        ok = found == [complex(-0.5, 0), complex(0.5, 0)]
        rows.append(_row("example9_1(0.5) scan minima at +-0.5", len(found), 2, ok,
                         "two cells"))
        m = ch.defect_scan(f92, 1.0, "-0.9:0.9:-0.9:0.9:0.05", 2048)
        ok = m.minima == [0j]
        rows.append(_row("example9_2(w^3) scan minimum at 0", len(m.minima), 1, ok,
                         "one cell"))
    return rows
