import math
import pickle

import numpy as np
import pytest
from scipy.special import binom

from holocircles.characterize import (BranchError, GridSpec, MobiusParams,
                                      PhiInverse, builtin_function, defect_scan,
                                      evenness_defect, example_7_product,
                                      example_7_vanishing, example_9_1, example_9_2,
                                      line_boundary_transport, line_constant_model,
                                      mobius_composite_residual, mobius_identity_check,
                                      ray_boundary_transport, ray_constant_model,
                                      substitution_chain, t_from_d,
                                      theorem_10_1_witness)
from holocircles.circles import Circle, extension_defect, rational_pole_scan
from holocircles.expr import evaluate, parse, scale_invariance_check


# ------------------------------------------------------------ Mobius maps

def test_t_from_d():
    assert t_from_d(0.6) == pytest.approx(1 / 3, abs=1e-16)
    assert t_from_d(0) == 0
    for d in np.random.default_rng(0).uniform(0, 1, 1000):
        t = t_from_d(d)
        assert 0 <= t < 1
        assert abs(2 * t / (1 + t * t) - d) < 1e-14
    for bad in (-0.1, 1.0, 2.0):
        with pytest.raises(ValueError):
            t_from_d(bad)


def test_mobius_params():
    p = MobiusParams(0.6, 0.25)
    assert p.t == pytest.approx(1 / 3)
    assert p.A == pytest.approx(np.exp(0.5j) / 9)
    with pytest.raises(ValueError):
        MobiusParams(1.0, 0)


def test_mobius_identities():
    assert mobius_identity_check(0.6) < 1e-13
    assert mobius_identity_check(1e-9) < 1e-13
    assert mobius_composite_residual(0.6) < 1e-13


def test_line_transport():
    assert line_boundary_transport("w^2", 0.3, 1.0, 1024) < 1e-13
    assert line_boundary_transport("w^3+0.2*w", 0.2 - 0.4j, 1.5, 1024) < 1e-13
    assert line_boundary_transport("w^2", 0, 1, 1024) < 1e-15
    assert line_boundary_transport("2.5 + 0*w", 0.3, 1, 1024) == 0


# ------------------------------------------------------------ ray transport

def test_ray_transport_example_9_1():
    f = example_9_1(0.5)
    tr = ray_boundary_transport(0.0, 0.5, f)
    assert np.max(np.abs(tr.values - tr.zeta)) < 1e-12


def test_ray_transport_at_d_zero():
    g = "w^3 + 0.5*w"
    f = ray_constant_model(g)
    tr = ray_boundary_transport(0.7, 0.0, f, 1024)
    expected = evaluate(f, np.exp(0.7j) * tr.zeta)
    assert np.max(np.abs(tr.values - expected)) < 1e-13


def test_ray_transport_matches_direct_defect(rng):
    f = ray_constant_model("w^3 + 0.4*w^2 - 0.1")
    for _ in range(10):
        alpha, d = rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.9)
        tr = ray_boundary_transport(alpha, d, f, 4096)
        direct = extension_defect(f, Circle(d * np.exp(1j * alpha), 1)).defect
        assert abs(tr.defect - direct) < 1e-10


def test_ray_transport_requires_resolution():
    f = example_9_1(0.5)
    with pytest.raises(BranchError, match="1024"):
        ray_boundary_transport(0.0, 0.5, f, 512)
    with pytest.raises(BranchError):
        # an argument jump of nearly pi between adjacent samples
        ray_boundary_transport(0.0, 1 - 1e-12, f, 1024)


# ---------------------------------------------------------------- evenness

def test_evenness_examples():
    assert evenness_defect("w^2") < 1e-15
    assert evenness_defect("w") == pytest.approx(1, abs=1e-15)
    assert evenness_defect("w^2 + 0.5*w^3") == pytest.approx(math.sqrt(0.25 / 1.25), abs=1e-14)
    assert evenness_defect(lambda w: w ** 4 - 2) < 1e-15


# ---------------------------------------------------------------- examples

def test_example_7_vanishing(rng):
    g = example_7_vanishing(2, 1)
    pts = 2 + np.exp(2j * np.pi * np.arange(1024) / 1024)
    values = evaluate(g, pts)
    assert np.max(np.abs(values)) < 1e-12 * np.max(np.abs(pts) ** 3)
    assert extension_defect(g, Circle(2, 1)).verdict == "extends"
    for _ in range(5):
        rho = rng.uniform(0.2, 3)
        a = 0.95 * rho * rng.random() * np.exp(2j * np.pi * rng.random())
        assert extension_defect(g, Circle(a, rho)).defect < 1e-10
    with pytest.raises(ValueError):
        example_7_vanishing(0.5, 1)


def test_example_7_product_reduces_to_single_factor(rng):
    single = example_7_vanishing(2 - 1j, 0.7)
    product = example_7_product([(2 - 1j, 0.7)])
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    assert np.allclose(evaluate(single, z), evaluate(product, z), rtol=1e-13, atol=0)


def test_example_7_product():
    h = example_7_product([(2, 1), (-3, 1)])
    for c in (Circle(2, 1), Circle(-3, 1), Circle(0.2, 1), Circle(0.5, 0.5)):
        assert extension_defect(h, c).defect < 1e-10
    assert extension_defect(h, Circle(2, 0.3)).defect > 0.01
    assert rational_pole_scan(h, Circle(2, 0.3))
    # continuous at the origin, bounded by a multiple of |z|^2 nearby
    near = 1e-4 * np.exp(2j * np.pi * np.arange(16) / 16)
    assert np.max(np.abs(evaluate(h, near))) < 100 * 1e-8
    assert evaluate(h, 0) == 0
    with pytest.raises(ValueError):
        example_7_product([(2, 1), (0.5, 1)])


def test_phi_inverse():
    a = 0.5
    inv = PhiInverse(a)
    u = np.exp(2j * np.pi * np.arange(1024) / 1024)
    assert np.max(np.abs(inv.forward(inv(u)) - u)) < 1e-13
    assert np.allclose(np.abs(inv(u)), 1, atol=1e-14)
    pickle.loads(pickle.dumps(example_9_1(a)))


def test_example_9_1_defects():
    f = example_9_1(0.5)
    assert f.kind == "ray_constant"
    zeta = np.exp(2j * np.pi * np.arange(256) / 256)
    assert np.max(np.abs(evaluate(f, 0.5 + zeta) - zeta)) < 1e-12
    assert extension_defect(f, Circle(0.5, 1)).defect < 1e-10
    assert extension_defect(f, Circle(-0.5, 1)).defect < 1e-10
    assert extension_defect(f, Circle(0.3, 1)).defect > 0.01
    assert scale_invariance_check(f, "ray") < 1e-12


def _w3_defect_series(d, terms=400):
    """Defect of (z/|z|)^3 on |z - d| = 1 from the binomial expansion.

    On that circle z/|z| = sqrt(zeta (zeta + d)/(1 + d zeta)), so
    (z/|z|)^3 = zeta^3 (1 + d/zeta)^(3/2) (1 + d zeta)^(-3/2); the Fourier
    coefficients are convolutions of two binomial series.
    """
    j = np.arange(terms)
    left = binom(1.5, j) * d ** j        # coefficient of zeta^(-j)
    right = binom(-1.5, j) * d ** j      # coefficient of zeta^(+j)
    coeffs = {}
    for jj in range(terms):
        n = 3 - jj + j                   # zeta^(3 - jj + k)
        for nn, v in zip(n, left[jj] * right):
            coeffs[nn] = coeffs.get(nn, 0.0) + v
    neg = sum(v * v for n, v in coeffs.items() if n < 0)
    total = sum(v * v for v in coeffs.values())
    return math.sqrt(neg / total)


def test_example_9_2():
    f = example_9_2("w^3")
    assert extension_defect(f, Circle(0, 1)).defect < 1e-10
    measured = extension_defect(f, Circle(0.4, 1)).defect
    assert measured == pytest.approx(_w3_defect_series(0.4), rel=1e-8)
    assert measured > 1e-4
    with pytest.raises(ValueError, match="even"):
        example_9_2("w^2")


def test_w3_defect_is_fourth_order():
    # the leading negative coefficient is binom(3/2, 4) d^4 = (3/128) d^4
    for d in (0.01, 0.02, 0.05):
        assert _w3_defect_series(d) == pytest.approx(3 / 128 * d ** 4, rel=0.05)
        f = example_9_2("w^3")
        assert extension_defect(f, Circle(d, 1)).defect == pytest.approx(
            _w3_defect_series(d), rel=1e-6)


def test_builtins():
    assert builtin_function("@example9_1(0.5)").kind == "ray_constant"
    assert builtin_function("@example9_2(w^3 + w)").kind == "ray_constant"
    assert builtin_function("@example7(2,1)").origin_value == 0
    h = builtin_function("@example7product(2,1,-3,1)")
    assert extension_defect(h, Circle(-3, 1)).defect < 1e-10
    for bad in ("@example7(2)", "@nope(1)", "example7(2,1)", "@example7product(2,1,3)"):
        with pytest.raises(ValueError):
            builtin_function(bad)


# ------------------------------------------------------------------ scans

def test_grid_spec():
    g = GridSpec.parse("-0.9:0.9:-0.9:0.9:0.05")
    assert g.re_values.size == 37 and 0.5 in g.re_values and 0.0 in g.im_values
    for bad in ("1:2:3", "0:1:0:1:0", "1:0:0:1:0.1"):
        with pytest.raises(ValueError):
            GridSpec.parse(bad)


def test_scan_entire_function():
    m = defect_scan(parse("z"), 1.0, "-1:1:-1:1:0.5", 256)
    assert len(m.minima) == 25
    assert np.all(m.defects < 1e-12)


def test_scan_records_errors_per_cell():
    m = defect_scan(parse("z^2/conj(z)"), 1.0, "-1:1:0:0:1", 64)
    assert m.verdicts[0, 0] == "error" and m.verdicts[0, 2] == "error"
    assert m.verdicts[0, 1] == "extends"
    assert set(m.errors) == {(0, 0), (0, 2)}


def test_scan_ray_scale_covariance():
    f = example_9_1(0.4)
    m1 = defect_scan(f, 1.0, "-0.6:0.6:-0.3:0.3:0.3", 1024)
    m2 = defect_scan(f, 2.5, "-1.5:1.5:-0.75:0.75:0.75", 1024)
    assert np.max(np.abs(m1.defects - m2.defects)) < 1e-10


def test_scan_parallel_matches_serial():
    f = example_9_1(0.5)
    m1 = defect_scan(f, 1.0, "-0.6:0.6:-0.2:0.2:0.2", 512, workers=1)
    m2 = defect_scan(f, 1.0, "-0.6:0.6:-0.2:0.2:0.2", 512, workers=3)
    assert np.array_equal(m1.defects, m2.defects)
    assert list(m1.rows()) == list(m2.rows())


# -------------------------------------------------------- two-circle test

def test_witness_examples():
    w = theorem_10_1_witness(line_constant_model("w^2 + w"), Circle(0.5, 1), Circle(0.3j, 1))
    assert w.both_extend and w.consistent and w.evenness < 1e-10
    f = example_9_1(0.5)
    w = theorem_10_1_witness(f, Circle(0.5, 1), Circle(0.3, 1))
    assert not w.both_extend and w.consistent
    with pytest.raises(ValueError):
        theorem_10_1_witness(f, Circle(0.5, 1), Circle(-0.5, 1))
    with pytest.raises(ValueError):
        theorem_10_1_witness(f, Circle(0.5, 1), Circle(0.5, 1))
    with pytest.raises(ValueError):
        theorem_10_1_witness(f, Circle(0.5, 2), Circle(0.3, 1))


def test_line_family_extends_around_origin(rng):
    for g in ("w", "w^2", "w^3+0.2*w"):
        f = line_constant_model(g)
        for _ in range(5):
            rho = rng.uniform(0.2, 3)
            a = 0.95 * rho * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            assert extension_defect(f, Circle(a, rho)).defect < 1e-9


def test_substitution_chain(rng):
    for _ in range(10):
        p1 = MobiusParams(rng.uniform(0, 0.95), rng.uniform(-np.pi, np.pi))
        p2 = MobiusParams(rng.uniform(0, 0.95), rng.uniform(-np.pi, np.pi))
        res = substitution_chain(p1, p2)
        assert res.residual < 1e-11
        assert res.distance_to_conjugate < 1e-11
        assert abs(abs(res.rotation) - 1) < 1e-11
        lam = (1 - res.A2 * np.conj(res.A1)) / (1 - np.conj(res.A2) * res.A1)
        assert abs(res.rotation - lam) < 1e-11
    real = substitution_chain(MobiusParams(0.6, 0), MobiusParams(0.3, 0))
    assert real.residual_without_rotation < 1e-11
    assert real.distance_to_printed < 1e-12
