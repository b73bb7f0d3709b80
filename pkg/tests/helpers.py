"""Shared generators for the test modules."""
import numpy as np

from holocircles.expr import Abs, Add, Const, ConjVar, Div, IntPow, Mul, Sub, Var


def random_points(rng, n, lo=0.3, hi=3.0):
    """Points with modulus in ``[lo, hi]`` and uniform argument."""
    r = rng.uniform(lo, hi, n)
    return r * np.exp(2j * np.pi * rng.random(n))


def random_tree(rng, depth=4, allow_abs=True):
    """A random expression tree over z, conj(z), abs(z) and constants."""
    if depth == 0 or rng.random() < 0.2:
        k = rng.integers(4 if allow_abs else 3)
        if k == 0:
            return Var()
        if k == 1:
            return ConjVar()
        if k == 2:
            re_, im = np.round(rng.uniform(-3, 3, 2), int(rng.integers(0, 4)))
            if rng.random() < 0.5:
                im = 0.0
            return Const(complex(re_ or 1.5, im))
        return Abs()
    op = rng.integers(5)
    left = random_tree(rng, depth - 1, allow_abs)
    if op == 4:
        return IntPow(Add(left, Const(4.0 + 0j)), int(rng.integers(-2, 4)))
    right = random_tree(rng, depth - 1, allow_abs)
    if op == 3:
        # shift the denominator so exact zeros on the sample annulus are rare
        return Div(left, Add(right, Const(4.0 + 0j)))
    return (Add, Sub, Mul)[op](left, right)
