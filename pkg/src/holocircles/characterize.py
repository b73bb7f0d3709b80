"""Functions constant on lines or rays through the origin.

Builders for the standard examples of non-holomorphic functions that still
extend from many circles, the disc-automorphism identities that move
boundary data between circles, and grid scans that locate the circles of a
fixed radius from which a function extends.
"""
from __future__ import annotations

import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .circles import (DEFAULT_N, DEFAULT_TOL, Circle, SamplingError,
                      extension_defect, spectrum)
from .expr import (Abs, Call, ConjVar, Div, EvaluationError, FunctionModel,
                   NativeFunction, Var, _const_text, parse,
                   scale_invariance_check)

__all__ = [
    "MobiusParams", "t_from_d", "mobius_identity_check",
    "mobius_composite_residual", "line_constant_model", "ray_constant_model",
    "line_boundary_transport", "ray_boundary_transport", "RayTransport",
    "evenness_defect", "GridSpec", "DefectMap", "defect_scan",
    "example_7_vanishing", "example_7_product", "example_9_1", "example_9_2",
    "PhiInverse", "theorem_10_1_witness", "WitnessResult",
    "substitution_chain", "ChainResult", "builtin_function", "BranchError",
    "EVENNESS_TOL",
]

EVENNESS_TOL = 1e-10
MIN_BRANCH_SAMPLES = 1024

Boundary = Union[FunctionModel, NativeFunction, Callable[[np.ndarray], np.ndarray], str]


class BranchError(RuntimeError):
    pass


def _boundary(g: Boundary):
    """Normalise a single-variable function given as text, model or callable."""
    if isinstance(g, str):
        return parse(g, var="w")
    return g


def _apply(g, values):
    values = np.asarray(values, dtype=complex)
    if isinstance(g, (FunctionModel, NativeFunction)):
        return np.broadcast_to(np.asarray(g._apply(values), dtype=complex),
                               values.shape)
    return np.broadcast_to(np.asarray(g(values), dtype=complex), values.shape)


def _unit_circle(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


# ------------------------------------------------------ disc automorphisms

def t_from_d(d: float) -> float:
    """The ``t`` in ``[0, 1)`` with ``2t/(1+t^2) = d``.

    Same value as ``(1 - sqrt(1 - d^2))/d``, written without cancellation.
    """
    if not 0 <= d < 1:
        raise ValueError(f"d must lie in [0, 1), got {d!r}")
    return d / (1.0 + math.sqrt(1.0 - d * d))


@dataclass(frozen=True)
class MobiusParams:
    d: float
    alpha: float = 0.0

    def __post_init__(self):
        if not 0 <= self.d < 1:
            raise ValueError("d must lie in [0, 1)")

    @property
    def t(self) -> float:
        return t_from_d(self.d)

    @property
    def A(self) -> complex:
        return complex(math.cos(2 * self.alpha), math.sin(2 * self.alpha)) * self.t ** 2

    @property
    def center(self) -> complex:
        return self.d * complex(math.cos(self.alpha), math.sin(self.alpha))


def _mobius_sides(a: float, samples: int):
    t = t_from_d(a)
    xi = _unit_circle(samples)
    m = (xi - t) / (1 - t * xi)
    lhs = (a + m) / (1 + a * m)
    rhs = (xi + t) / (1 + t * xi)
    return xi, t, m, lhs, rhs


def mobius_identity_check(a: float, samples: int = 1024) -> float:
    """Max over the unit circle of ``|(a + M)/(1 + a M) - (xi + t)/(1 + t xi)|``
    with ``M = (xi - t)/(1 - t xi)`` and ``t = t_from_d(a)``."""
    _, _, _, lhs, rhs = _mobius_sides(a, samples)
    return float(np.max(np.abs(lhs - rhs)))


def mobius_composite_residual(a: float, samples: int = 1024) -> float:
    """Max of ``|M(xi) (xi + t)/(1 + t xi) - (xi^2 - t^2)/(1 - t^2 xi^2)|``."""
    xi, t, m, _, rhs = _mobius_sides(a, samples)
    return float(np.max(np.abs(m * rhs - (xi ** 2 - t * t) / (1 - t * t * xi ** 2))))


# ----------------------------------------------------------- scale models

def line_constant_model(g: Boundary, name: str = "g") -> FunctionModel:
    """``f(z) = g(z / conj(z))``."""
    g = _boundary(g)
    return FunctionModel(root=Call(name, Div(Var(), ConjVar())),
                         kind="line_constant", registry={name: g}, g=name)


def ray_constant_model(g: Boundary, name: str = "g", label=None) -> FunctionModel:
    """``f(z) = g(z / |z|)``."""
    g = _boundary(g)
    return FunctionModel(root=Call(name, Div(Var(), Abs())),
                         kind="ray_constant", registry={name: g}, g=name,
                         label=label)


def line_boundary_transport(g: Boundary, a: complex, rho: float,
                            samples: int = 1024) -> float:
    """Max residual between ``f(a + zeta rho)`` for ``f = g(z/conj(z))`` and
    ``g(zeta (zeta + a/rho) / (1 + (conj(a)/rho) zeta))`` on the unit circle."""
    a = complex(a)
    if abs(a) >= rho:
        raise ValueError("circle must surround the origin")
    f = line_constant_model(g)
    zeta = _unit_circle(samples)
    direct = f.evaluate(a + zeta * rho)
    moved = _apply(f.boundary_function,
                   zeta * (zeta + a / rho) / (1 + (a.conjugate() / rho) * zeta))
    return float(np.max(np.abs(direct - moved)))


@dataclass(frozen=True)
class RayTransport:
    zeta: np.ndarray
    root: np.ndarray        # continuous square root along the circle
    values: np.ndarray      # q(zeta)
    spectrum: object

    @property
    def defect(self) -> float:
        return self.spectrum.defect


def ray_boundary_transport(alpha: float, d: float, f, samples: int = 4096
                           ) -> RayTransport:
    """Boundary function ``q(zeta) = f(e^{i alpha} sqrt(zeta (d + zeta)/(1 + d zeta)))``.

    The square root is lifted continuously along the sampled circle by
    unwrapping the argument, starting from ``sqrt(1) = 1`` at ``zeta = 1``.
    """
    if not 0 <= d < 1:
        raise ValueError("d must lie in [0, 1)")
    if samples < MIN_BRANCH_SAMPLES:
        raise BranchError(f"branch tracking needs at least {MIN_BRANCH_SAMPLES} samples")
    zeta = _unit_circle(samples)
    x = zeta * (d + zeta) / (1 + d * zeta)
    arg = np.angle(x)
    step = np.angle(x[1:] / x[:-1])
    if np.max(np.abs(step)) > np.pi / 2:
        raise BranchError("argument moves more than a quarter turn between "
                          "adjacent samples; increase the sample count")
    lifted = arg[0] + np.concatenate([[0.0], np.cumsum(step)])
    root = np.sqrt(np.abs(x)) * np.exp(0.5j * lifted)
    rot = complex(math.cos(alpha), math.sin(alpha))
    values = np.asarray(f.evaluate(rot * root) if isinstance(f, FunctionModel)
                        else f(rot * root), dtype=complex)
    return RayTransport(zeta=zeta, root=root, values=values,
                        spectrum=spectrum(values))


def evenness_defect(g, n: int = DEFAULT_N) -> float:
    """Relative L2 mass of the odd Fourier coefficients of ``g`` on the
    unit circle; 0 for even ``g``, 1 for odd ``g``."""
    g = _boundary(g)
    values = _apply(g, _unit_circle(n))
    c = np.fft.fft(values) / n
    power = np.abs(c) ** 2
    total = power.sum()
    if total <= 1e-30:
        return 0.0
    return float(math.sqrt(power[1::2].sum() / total))


# --------------------------------------------------------------- examples

def example_7_vanishing(a: complex, rho: float) -> FunctionModel:
    """``(z^2/conj(z)) ((z - a)(conj(z) - conj(a)) - rho^2)``, zero at 0.

    Vanishes on the circle ``|z - a| = rho``; continuous at the origin.
    """
    return example_7_product([(a, rho)])


def example_7_product(params) -> FunctionModel:
    """``(z^2/conj(z))^n prod_j ((z - a_j)(conj(z) - conj(a_j)) - rho_j^2)``."""
    params = [(complex(a), float(r)) for a, r in params]
    if not params:
        raise ValueError("need at least one (a, rho) pair")
    for a, r in params:
        if not abs(a) > r > 0:
            raise ValueError(f"requires |a| > rho > 0, got a={a}, rho={r}")
    n = len(params)
    factors = "*".join(
        f"((z - {_const_text(a)})*(conj(z) - {_const_text(a.conjugate())}) - {_const_text(complex(r * r))})"
        for a, r in params)
    text = f"z^{2 * n}*{factors}/conj(z)^{n}"
    label = ("example7(" if n == 1 else "example7product(") + \
        ",".join(f"{_fmt_arg(a)},{r:g}" for a, r in params) + ")"
    return parse(text, origin_value=0j, label=label)


def _fmt_arg(a: complex) -> str:
    return f"{a.real:g}" if a.imag == 0 else f"{a.real:g}{a.imag:+g}i"


class PhiInverse:
    """Inverse of ``u -> (a + u)/|a + u|`` on the unit circle, ``0 < a < 1``.

    For ``|u| = 1`` returns ``s u - a`` where ``s > 0`` solves ``|s u - a| = 1``.
    """

    def __init__(self, a: float):
        if not 0 < a < 1:
            raise ValueError("a must lie in (0, 1)")
        self.a = float(a)

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        p = (self.a * np.conj(u)).real
        s = p + np.sqrt(p * p + 1.0 - self.a ** 2)
        return s * u - self.a

    def forward(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return (self.a + zeta) / np.abs(self.a + zeta)


def example_9_1(a: float) -> FunctionModel:
    """Ray-constant ``f(z) = Phi^{-1}(z/|z|)`` with ``Phi(u) = (a+u)/|a+u|``.

    ``f(a + zeta) = zeta`` on the unit circle, so ``f`` extends from the
    unit circles centred at ``a`` and ``-a``.
    """
    inv = PhiInverse(a)
    native = NativeFunction("phi_inv", inv, f"inverse of (a+u)/|a+u|, a={a:g}")
    return ray_constant_model(native, name="phi_inv", label=f"example9_1({a:g})")


def example_9_2(g: Boundary) -> FunctionModel:
    """``f(z) = g(z/|z|)`` for a boundary function ``g`` that is not even."""
    g = _boundary(g)
    ev = evenness_defect(g)
    if ev < EVENNESS_TOL:
        raise ValueError(
            f"g is numerically even (evenness defect {ev:.3g}); a ray-constant "
            "function built from even boundary data is constant on lines and "
            "extends from every circle around the origin, so it cannot single "
            "out the unit circle")
    label = None
    if isinstance(g, FunctionModel):
        label = f"example9_2({g.to_text()})"
    return ray_constant_model(g, label=label)


# ------------------------------------------------------------------ scans

@dataclass(frozen=True)
class GridSpec:
    re0: float
    re1: float
    im0: float
    im1: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.re1 < self.re0 or self.im1 < self.im0:
            raise ValueError("grid ranges must be increasing")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 5:
            raise ValueError("grid must look like re0:re1:im0:im1:step")
        return cls(*(float(p) for p in parts))

    @staticmethod
    def _axis(lo, hi, step):
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        # rounding removes accumulation noise so 0.5 is exactly 0.5
        return np.round(lo + step * np.arange(count), 12)

    @property
    def re_values(self) -> np.ndarray:
        return self._axis(self.re0, self.re1, self.step)

    @property
    def im_values(self) -> np.ndarray:
        return self._axis(self.im0, self.im1, self.step)


@dataclass
class DefectMap:
    """Extension defect for a grid of circle centres at a fixed radius.

    ``defects[j, i]`` belongs to centre ``re_values[i] + 1j*im_values[j]``.
    Cells whose sampling failed hold ``nan`` and the verdict ``error``.
    """

    radius: float
    grid: GridSpec
    re_values: np.ndarray
    im_values: np.ndarray
    defects: np.ndarray
    floors: np.ndarray
    verdicts: np.ndarray
    N: int
    tolerance: float
    errors: dict = field(default_factory=dict)

    @property
    def minima(self) -> list[complex]:
        js, is_ = np.nonzero(self.verdicts == "extends")
        return [complex(self.re_values[i], self.im_values[j]) for j, i in zip(js, is_)]

    def rows(self):
        """``(center_re, center_im, defect, verdict)`` in row-major order."""
        for j, im in enumerate(self.im_values):
            for i, re_ in enumerate(self.re_values):
                yield float(re_), float(im), float(self.defects[j, i]), str(self.verdicts[j, i])


def _scan_cell(args):
    f, center, radius, n, tol = args
    try:
        rep = extension_defect(f, Circle(center, radius), n, tol)
    except (SamplingError, EvaluationError, FloatingPointError) as exc:
        return math.nan, math.nan, "error", str(exc)
    return rep.defect, rep.aliasing_floor, rep.verdict, None


def defect_scan(f, radius: float, grid: GridSpec | str, n: int = DEFAULT_N,
                tol: float = DEFAULT_TOL, workers: int | None = None) -> DefectMap:
    """Extension defect of ``f`` on every circle ``|z - c| = radius`` with
    ``c`` on the grid.  Sampling failures are recorded per cell.

    With ``workers > 1`` the cells are spread over a process pool; results
    are gathered by index, so the map does not depend on the worker count.
    """
    if isinstance(grid, str):
        grid = GridSpec.parse(grid)
    if workers is None:
        workers = int(os.environ.get("HOLOCIRCLES_WORKERS", "1"))
    re_v, im_v = grid.re_values, grid.im_values
    jobs = [(f, complex(x, y), radius, n, tol) for y in im_v for x in re_v]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_cell, jobs,
                                    chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_scan_cell(job) for job in jobs]
    shape = (im_v.size, re_v.size)
    defects = np.array([r[0] for r in results]).reshape(shape)
    floors = np.array([r[1] for r in results]).reshape(shape)
    verdicts = np.array([r[2] for r in results], dtype=object).reshape(shape)
    errors = {(k // re_v.size, k % re_v.size): r[3]
              for k, r in enumerate(results) if r[3] is not None}
    return DefectMap(radius=radius, grid=grid, re_values=re_v, im_values=im_v,
                     defects=defects, floors=floors, verdicts=verdicts, N=n,
                     tolerance=tol, errors=errors)


# ------------------------------------------------- two circles, one function

@dataclass(frozen=True)
class WitnessResult:
    consistent: bool
    evenness: float | None
    defect1: float
    defect2: float
    both_extend: bool


def theorem_10_1_witness(f, c1: Circle, c2: Circle, tol: float = DEFAULT_TOL,
                         n: int = DEFAULT_N) -> WitnessResult:
    """Check that a ray-constant ``f`` extending from two admissible unit
    circles has even boundary data.

    The circles must have radius 1, centres in the unit disc, and centres
    neither equal nor opposite.  ``consistent`` is false only when both
    circles pass the defect test while ``u -> f(u)`` on the unit circle is
    not even.
    """
    for c in (c1, c2):
        if not math.isclose(c.radius, 1.0):
            raise ValueError("both circles must have radius 1")
        if abs(c.center) >= 1:
            raise ValueError("circle centres must lie in the unit disc")
    if abs(c2.center - c1.center) < 1e-12 or abs(c2.center + c1.center) < 1e-12:
        raise ValueError("centres must be neither equal nor opposite")
    if isinstance(f, FunctionModel) and f.kind not in ("ray_constant", "line_constant"):
        if scale_invariance_check(f, "ray", samples=200) > 1e-10:
            raise ValueError("f is not constant on rays")
    r1 = extension_defect(f, c1, n, tol)
    r2 = extension_defect(f, c2, n, tol)
    both = r1.verdict == "extends" and r2.verdict == "extends"
    evenness = None
    consistent = True
    if both:
        evaluate = f.evaluate if isinstance(f, FunctionModel) else f
        evenness = evenness_defect(evaluate, n)
        consistent = evenness < max(tol, EVENNESS_TOL)
    return WitnessResult(consistent=consistent, evenness=evenness,
                         defect1=r1.defect, defect2=r2.defect, both_extend=both)


@dataclass(frozen=True)
class ChainResult:
    A1: complex
    A2: complex
    C: complex
    rotation: complex
    residual: float
    residual_without_rotation: float
    conjugate_consistency: float
    C_printed: complex
    C_conjugate: complex

    @property
    def distance_to_printed(self) -> float:
        return abs(self.C - self.C_printed)

    @property
    def distance_to_conjugate(self) -> float:
        return abs(self.C - self.C_conjugate)

    def to_dict(self) -> dict:
        return {
            "A1": [self.A1.real, self.A1.imag], "A2": [self.A2.real, self.A2.imag],
            "C": [self.C.real, self.C.imag],
            "rotation": [self.rotation.real, self.rotation.imag],
            "residual": self.residual,
            "residual_without_rotation": self.residual_without_rotation,
            "C_formula_A1A2": [self.C_printed.real, self.C_printed.imag],
            "C_formula_conjA1A2": [self.C_conjugate.real, self.C_conjugate.imag],
            "distance_formula_A1A2": self.distance_to_printed,
            "distance_formula_conjA1A2": self.distance_to_conjugate,
        }


def _blaschke(x, A):
    return (x + A) / (1 + np.conj(A) * x)


def substitution_chain(p1: MobiusParams, p2: MobiusParams, samples: int = 512
                       ) -> ChainResult:
    """Fit ``Y = lam (W2 + C)/(1 + conj(C) W2)`` where, for ``Z`` on the unit
    circle, ``W2 = (Z^2 + A1)/(1 + conj(A1) Z^2)`` and
    ``Y = (Z^2 + A2)/(1 + conj(A2) Z^2)``.

    ``C`` and the unimodular ``lam`` come from a linear least-squares fit
    ``Y = lam W2 + lam C - conj(C) W2 Y``; the fitted map is then checked on
    every sample.
    """
    A1, A2 = p1.A, p2.A
    x = _unit_circle(samples) ** 2
    w2 = _blaschke(x, A1)
    y = _blaschke(x, A2)
    design = np.column_stack([w2, np.ones_like(w2), -w2 * y])
    (lam, lam_c, c_bar), *_ = np.linalg.lstsq(design, y, rcond=None)
    C = lam_c / lam
    fitted = lam * _blaschke(w2, C)
    return ChainResult(
        A1=complex(A1), A2=complex(A2), C=complex(C), rotation=complex(lam),
        residual=float(np.max(np.abs(y - fitted))),
        residual_without_rotation=float(np.max(np.abs(y - _blaschke(w2, C)))),
        conjugate_consistency=float(abs(np.conj(c_bar) - C)),
        C_printed=complex((A2 - A1) / (1 - A1 * A2)),
        C_conjugate=complex((A2 - A1) / (1 - np.conj(A1) * A2)),
    )


# ------------------------------------------------------- named functions

_BUILTIN_RE = re.compile(r"^@(?P<name>[A-Za-z0-9_]+)\((?P<args>.*)\)\s*$")


def _complex_arg(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def builtin_function(text: str) -> FunctionModel:
    """Resolve ``@example7(a,rho)``, ``@example7product(a1,rho1,a2,rho2,...)``,
    ``@example9_1(a)`` or ``@example9_2(<expression in w>)``."""
    m = _BUILTIN_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a builtin reference: {text!r}")
    name, args = m.group("name"), m.group("args")
    if name == "example9_2":
        return example_9_2(args)
    values = [a for a in args.split(",") if a.strip()]
    if name == "example7":
        if len(values) != 2:
            raise ValueError("@example7 takes (a, rho)")
        return example_7_vanishing(_complex_arg(values[0]), float(values[1]))
    if name == "example7product":
        if len(values) < 2 or len(values) % 2:
            raise ValueError("@example7product takes pairs a1,rho1,a2,rho2,...")
        pairs = [(_complex_arg(values[k]), float(values[k + 1]))
                 for k in range(0, len(values), 2)]
        return example_7_product(pairs)
    if name == "example9_1":
        if len(values) != 1:
            raise ValueError("@example9_1 takes (a)")
        return example_9_1(float(values[0]))
    raise ValueError(f"unknown builtin function @{name}")
