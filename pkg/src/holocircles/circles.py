"""Boundary spectra on circles and the holomorphic-extension defect.

A continuous function on a circle extends holomorphically to the disc iff
all its negative Fourier coefficients vanish.  The defect measured here is
the relative L2 mass of those coefficients, computed from an FFT of equally
spaced samples and checked against a run at twice the resolution.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

import numpy as np

from .expr import (EvaluationError, FunctionModel, evaluate, evaluate_zw,
                   is_finite_formula, magnitude_scale, rational_parts)

__all__ = [
    "Circle", "BoundarySpectrum", "DefectReport", "SamplingError", "PoleError",
    "sample_on_circle", "spectrum", "circle_spectrum", "extension_defect",
    "spectral_extension_eval", "rational_extension_eval", "rational_pole_scan",
    "read_circles_csv", "EPS_ORIGIN", "DEFAULT_N", "DEFAULT_TOL",
]

logger = logging.getLogger(__name__)

EPS_ORIGIN = 1e-9
DEFAULT_N = 4096
DEFAULT_TOL = 1e-8
ENERGY_FLOOR = 1e-30
# boundary data below this fraction of its term magnitudes is rounding noise
ZERO_RELATIVE = 1e-13

Function = Union[FunctionModel, Callable[[np.ndarray], np.ndarray]]


class SamplingError(ValueError):
    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class PoleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Circle:
    """The circle ``|zeta - center| = radius``."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius!r}")

    @property
    def surrounds_origin(self) -> bool:
        return abs(self.center) < self.radius

    @property
    def passes_through_origin(self) -> bool:
        return math.isclose(abs(self.center), self.radius, rel_tol=1e-12)

    def points(self, n: int, offset: float = 0.0) -> np.ndarray:
        k = np.arange(n) + offset
        return self.center + self.radius * np.exp(2j * np.pi * k / n)

    def contains(self, p, closed=False) -> bool:
        d = abs(complex(p) - self.center)
        return d <= self.radius if closed else d < self.radius


def _check_n(n: int):
    if n < 8 or n & (n - 1):
        raise ValueError(f"N must be a power of two >= 8, got {n}")


def _evaluator(f: Function):
    """Vectorised evaluator, and whether ``f`` is finite at the origin."""
    if isinstance(f, FunctionModel):
        finite = f.origin_value is not None or is_finite_formula(f)
        return (lambda z: evaluate(f, z)), finite
    finite = getattr(f, "origin_value", None) is not None
    return (lambda z: np.asarray(f(z), dtype=complex)), finite


def _sample(f: Function, c: Circle, n: int, eps0: float = EPS_ORIGIN):
    _check_n(n)
    func, finite_at_origin = _evaluator(f)
    offset = 0.0
    pts = c.points(n)
    near = np.flatnonzero(np.abs(pts) < eps0)
    if near.size:
        if not finite_at_origin:
            k = int(near[0])
            raise SamplingError(
                f"sample k={k} lies within {eps0:g} of the origin, where the "
                "function is undefined", k)
        # shift the grid half a step so no node sits on the origin
        offset = 0.5
        pts = c.points(n, offset)
    try:
        samples = np.asarray(func(pts), dtype=complex)
    except EvaluationError as exc:
        raise SamplingError(f"cannot sample on {c}: {exc}") from exc
    if not np.all(np.isfinite(samples)):
        k = int(np.flatnonzero(~np.isfinite(samples))[0])
        raise SamplingError(f"non-finite sample at k={k}", k)
    floor = ENERGY_FLOOR
    if isinstance(f, FunctionModel):
        with np.errstate(all="ignore"):
            scale = magnitude_scale(f, pts)
        rms = float(np.sqrt(np.mean(scale ** 2)))
        if math.isfinite(rms):
            floor = max(floor, (ZERO_RELATIVE * rms) ** 2)
    return samples, offset, floor


def sample_on_circle(f: Function, c: Circle, n: int, eps0: float = EPS_ORIGIN
                     ) -> np.ndarray:
    """Values of ``f`` at ``c.center + c.radius * exp(2 pi i k / n)``.

    For functions declared continuous at the origin, a circle through the
    origin is sampled on the half-step grid instead.
    """
    return _sample(f, c, n, eps0)[0]


@dataclass(frozen=True)
class BoundarySpectrum:
    """Fourier coefficients ``c_n``, ``-N/2 < n <= N/2``, of circle samples.

    ``offset`` is the grid shift in units of the sample spacing; the
    coefficients are phase-corrected so they are always the coefficients of
    the boundary function in ``exp(i n theta)``.
    """

    N: int
    indices: np.ndarray
    coefficients: np.ndarray
    circle: Circle | None = None
    offset: float = 0.0
    energy_floor: float = ENERGY_FLOOR
    total_energy: float = field(init=False)
    negative_energy: float = field(init=False)

    def __post_init__(self):
        power = np.abs(self.coefficients) ** 2
        object.__setattr__(self, "total_energy", float(power.sum()))
        object.__setattr__(self, "negative_energy",
                           float(power[self.indices < 0].sum()))

    def coefficient(self, n: int) -> complex:
        return complex(self.coefficients[n + self.N // 2 - 1])

    @property
    def defect(self) -> float:
        if self.total_energy <= self.energy_floor:
            return 0.0
        return math.sqrt(self.negative_energy / self.total_energy)

    @property
    def tail_energy(self) -> float:
        """Energy in the top octave ``N/4 < |n| <= N/2``."""
        mask = np.abs(self.indices) > self.N // 4
        return float(np.sum(np.abs(self.coefficients[mask]) ** 2))

    def nonnegative(self) -> np.ndarray:
        """``c_0, c_1, ..., c_{N/2}``."""
        return self.coefficients[self.indices >= 0]

    def samples(self) -> np.ndarray:
        """Inverse transform back to the sample values."""
        n = self.N
        phase = np.exp(2j * np.pi * self.indices * self.offset / n)
        full = np.zeros(n, dtype=complex)
        full[self.indices % n] = self.coefficients * phase
        return np.fft.ifft(full) * n


def spectrum(samples, circle: Circle | None = None, offset: float = 0.0,
             energy_floor: float = ENERGY_FLOOR) -> BoundarySpectrum:
    """DFT of circle samples, ``c_n = (1/N) sum_k f_k exp(-2 pi i k n / N)``.

    Total energy at or below ``energy_floor`` counts as the zero function.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.size
    _check_n(n)
    raw = np.fft.fft(samples) / n
    indices = np.arange(-n // 2 + 1, n // 2 + 1)
    coeffs = raw[indices % n]
    if offset:
        coeffs = coeffs * np.exp(-2j * np.pi * indices * offset / n)
    return BoundarySpectrum(N=n, indices=indices, coefficients=coeffs,
                            circle=circle, offset=offset, energy_floor=energy_floor)


def circle_spectrum(f: Function, c: Circle, n: int = DEFAULT_N) -> BoundarySpectrum:
    samples, offset, floor = _sample(f, c, n)
    return spectrum(samples, circle=c, offset=offset, energy_floor=floor)


@dataclass(frozen=True)
class DefectReport:
    circle: Circle
    N_used: int
    defect: float
    aliasing_floor: float
    verdict: str
    tolerance: float = DEFAULT_TOL

    def to_dict(self) -> dict:
        return {
            "center_re": self.circle.center.real,
            "center_im": self.circle.center.imag,
            "radius": self.circle.radius,
            "N": self.N_used,
            "defect": self.defect,
            "aliasing_floor": self.aliasing_floor,
            "verdict": self.verdict,
        }


def classify(defect: float, floor: float, tol: float) -> str:
    """Verdict for a defect measured with a given aliasing floor."""
    if defect < tol:
        return "extends" if floor < tol else "inconclusive"
    if defect <= 10.0 * floor:
        return "inconclusive"
    return "does_not_extend"


def extension_defect(f: Function, c: Circle, n: int = DEFAULT_N,
                     tol: float = DEFAULT_TOL) -> DefectReport:
    """Relative negative-frequency mass of ``f`` on ``c``, with a verdict.

    The aliasing floor combines the change of the defect from ``n`` to
    ``2n`` samples with the relative amplitude left in the top octave.
    """
    s1 = circle_spectrum(f, c, n)
    s2 = circle_spectrum(f, c, 2 * n)
    d1, d2 = s1.defect, s2.defect
    tail = 0.0
    if s1.total_energy > s1.energy_floor:
        tail = math.sqrt(s1.tail_energy / s1.total_energy)
    floor = abs(d1 - d2) + tail
    return DefectReport(circle=c, N_used=n, defect=d1, aliasing_floor=floor,
                        verdict=classify(d1, floor, tol), tolerance=tol)


def spectral_extension_eval(s: BoundarySpectrum, p, with_tail: bool = False):
    """Evaluate the holomorphic extension ``sum_{n>=0} c_n ((p-a)/rho)^n``.

    The series is truncated at ``n = N/2``; with ``with_tail=True`` the
    geometric bound ``|c_{N/2}| r^{N/2} / (1 - r)`` is returned as well.
    """
    if s.circle is None:
        raise ValueError("spectrum has no circle attached")
    if s.defect > 1e-6:
        logger.warning("evaluating extension of a boundary function with "
                       "defect %.3g", s.defect)
    a, rho = s.circle.center, s.circle.radius
    u = (np.asarray(p, dtype=complex) - a) / rho
    r = np.abs(u)
    if np.any(r >= 1):
        raise ValueError("point is not inside the open disc")
    coeffs = s.nonnegative()
    value = np.polyval(coeffs[::-1], u)
    if not with_tail:
        return complex(value) if np.ndim(value) == 0 else value
    tail = abs(coeffs[-1]) * r ** (s.N // 2) / (1 - r)
    if np.ndim(value) == 0:
        return complex(value), float(tail)
    return value, tail


def _substituted(node, c: Circle, z):
    w = np.conj(c.center) + c.radius ** 2 / (z - c.center)
    return evaluate_zw(node, z, w)


def rational_extension_eval(f: FunctionModel, c: Circle, p) -> complex:
    """Meromorphic extension ``P(p, w) / Q(p, w)``, ``w = conj(a) + rho^2/(p-a)``.

    On the circle ``w`` equals ``conj(p)``, so this is the unique
    meromorphic continuation of ``f`` restricted to the circle.
    """
    P, Q = rational_parts(f)
    p = complex(p)
    if p == c.center:
        raise PoleError("the substitution is singular at the circle's center")
    den = _substituted(Q, c, p)
    if abs(den) < 1e-12:
        raise PoleError(f"extension has a pole at {p}")
    return _substituted(P, c, p) / den


def rational_pole_scan(f: FunctionModel, c: Circle, resolution: int = 201,
                       threshold: float = 1e-8) -> list[complex]:
    """Zeros of the substituted denominator inside the open disc.

    Local minima of ``|Q(z, conj(a) + rho^2/(z-a))|`` on a square grid are
    polished with Newton steps (the substituted denominator is holomorphic
    in ``z``) and kept when the polished value is below ``threshold``
    relative to the grid's typical magnitude.
    """
    _, Q = rational_parts(f)
    a, rho = c.center, c.radius
    x = np.linspace(-rho, rho, resolution)
    zz = a + x[None, :] + 1j * x[:, None]
    inside = np.abs(zz - a) < rho * (1 - 1e-9)
    inside &= np.abs(zz - a) > 1e-6 * rho
    with np.errstate(all="ignore"):
        mag = np.abs(np.broadcast_to(_substituted(Q, c, zz), zz.shape))
    if not np.any(inside):
        return []
    mag = np.where(inside & np.isfinite(mag), mag, np.inf)
    scale = max(1.0, float(np.median(mag[np.isfinite(mag)])))
    if np.ptp(mag[np.isfinite(mag)]) <= 1e-14 * scale:
        return []  # constant denominator

    padded = np.pad(mag, 1, constant_values=np.inf)
    is_min = np.isfinite(mag)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                neighbour = padded[1 + di:1 + di + mag.shape[0],
                                   1 + dj:1 + dj + mag.shape[1]]
                is_min &= mag <= neighbour

    h = 1e-7 * rho
    poles: list[complex] = []
    for i, j in zip(*np.nonzero(is_min)):
        z = complex(zz[i, j])
        for _ in range(60):
            q = _substituted(Q, c, z)
            dq = (_substituted(Q, c, z + h) - _substituted(Q, c, z - h)) / (2 * h)
            if dq == 0 or not np.isfinite(dq):
                break
            step = q / dq
            z -= step
            if abs(z - a) >= rho or abs(step) < 1e-15 * rho:
                break
        if abs(z - a) >= rho or abs(z - a) < 1e-6 * rho:
            continue
        if abs(_substituted(Q, c, z)) > threshold * scale:
            continue
        if all(abs(z - other) > 1e-8 * rho for other in poles):
            poles.append(z)
    return poles


def read_circles_csv(path) -> list[Circle]:
    """Circles from a CSV file with columns ``re,im,radius``.

    A header row is optional.
    """
    circles = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                re_, im, rad = (float(v) for v in row[:3])
            except ValueError:
                if not circles and row[0].strip().lower() in ("re", "center_re"):
                    continue
                raise ValueError(f"bad circle row: {row!r}") from None
            circles.append(Circle(complex(re_, im), rad))
    return circles


def defect_batch(f: Function, circles: Iterable[Circle], n: int = DEFAULT_N,
                 tol: float = DEFAULT_TOL) -> list[DefectReport]:
    return [extension_defect(f, c, n, tol) for c in circles]
