"""Boundary identifications of the disc that define the quantum surfaces.

Orientable genus ``g`` glues arc ``a_k`` on the upper semicircle to the reversed
arc ``a_k^{-1}`` on the lower one (``2g`` pairs); the sphere glues ``e^{i pi t}``
to ``e^{-i pi t}``; non-orientable genus ``g`` glues ``a_k`` to ``b_k`` with the
same direction of travel (``g`` pairs).  A symbol belongs to the surface algebra
when it takes equal values at identified points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fourier import DecayReport, FourierSeries, evaluate, from_samples

__all__ = [
    "SurfacePreset",
    "MembershipResult",
    "FourierConstraint",
    "identify",
    "is_member",
    "fourier_constraints",
    "loop_generator",
    "smoothstep",
    "arc_of",
]

TWO_PI = 2.0 * math.pi
KINDS = ("orientable", "sphere", "nonorientable")


class DomainError(ValueError):
    """Angle outside the part of the circle a preset identifies from."""


@dataclass(frozen=True)
class SurfacePreset:
    kind: str
    genus: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "sphere":
            if self.genus != 0:
                raise ValueError("the sphere has genus 0")
        elif self.genus < 1:
            raise ValueError(f"{self.kind} surfaces need genus >= 1")

    @classmethod
    def sphere(cls) -> "SurfacePreset":
        return cls("sphere", 0)

    @classmethod
    def orientable(cls, g: int) -> "SurfacePreset":
        return cls("orientable", g)

    @classmethod
    def nonorientable(cls, g: int) -> "SurfacePreset":
        return cls("nonorientable", g)

    @classmethod
    def from_config(cls, d: dict) -> "SurfacePreset":
        kind = d.get("kind")
        if kind == "sphere":
            return cls.sphere()
        return cls(kind, int(d.get("genus", 0)))

    def to_config(self) -> dict:
        return {"kind": self.kind, "genus": self.genus}

    @property
    def arc_count(self) -> int:
        if self.kind == "orientable":
            return 2 * self.genus
        if self.kind == "sphere":
            return 1
        return self.genus

    @property
    def arc_width(self) -> float:
        """Angular width of one arc."""
        if self.kind == "orientable":
            return math.pi / (2 * self.genus)
        if self.kind == "sphere":
            return math.pi
        return math.pi / self.genus

    def __str__(self):
        return "sphere" if self.kind == "sphere" else f"{self.kind}(g={self.genus})"


def _normalize(theta: float) -> float:
    t = math.fmod(float(theta), TWO_PI)
    if t < 0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


def _index(x: float) -> int:
    """Arc index for a position ``x`` measured in arc widths; ties go to the lower arc."""
    return max(1, math.ceil(x - 1e-12))


def arc_of(preset: SurfacePreset, theta: float) -> tuple[str, int, float]:
    """Locate ``theta`` as ``(family, k, t)``: family 'a' (upper) or 'partner' (lower)."""
    th = _normalize(theta)
    w = preset.arc_width
    if preset.kind == "sphere":
        if th <= math.pi:
            return ("a", 1, th / math.pi)
        return ("partner", 1, (TWO_PI - th) / math.pi)
    if th <= math.pi:
        k = min(_index(th / w), preset.arc_count)
        return ("a", k, th / w - (k - 1))
    if preset.kind == "nonorientable":
        # b_k(t) sits at angle 2 pi + pi (t - k) / g
        x = (TWO_PI - th) / w
        k = min(_index(x), preset.arc_count)
        return ("partner", k, (th - TWO_PI) / w + k)
    # a_k^{-1}(t) sits at angle pi + pi (k - t) / (2g)
    k = min(_index((th - math.pi) / w), preset.arc_count)
    return ("partner", k, k - (th - math.pi) / w)


def identify(preset: SurfacePreset, theta: float) -> float:
    """Angle of the boundary point glued to ``theta``, normalized to [0, 2 pi)."""
    th = _normalize(theta)
    if preset.kind == "sphere":
        return _normalize(TWO_PI - th)
    g = preset.genus
    if preset.kind == "orientable":
        family, k, _ = arc_of(preset, th)
        return _normalize(math.pi + math.pi * (2 * k - 1) / (2 * g) - th)
    if th > math.pi + 1e-15:
        raise DomainError(f"non-orientable identification is read from [0, pi]; got {theta!r}")
    _, k, t = arc_of(preset, th)
    return _normalize(math.pi * (t - k) / g)


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    max_deviation: float
    worst_angle: float

    def __bool__(self):
        return self.member


def _grid(preset: SurfacePreset, grid_size: int) -> np.ndarray:
    theta = TWO_PI * np.arange(grid_size) / grid_size
    if preset.kind == "nonorientable":
        theta = theta[theta <= math.pi]
    return theta


def is_member(preset: SurfacePreset, f: FourierSeries, grid_size: int = 256,
              tol: float = 1e-9) -> MembershipResult:
    """Sampled check that ``f`` agrees at every pair of identified points."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    theta = _grid(preset, grid_size)
    partner = np.array([identify(preset, t) for t in theta])
    dev = np.abs(evaluate(f, theta) - evaluate(f, partner))
    j = int(np.argmax(dev))
    worst = float(dev[j])
    return MembershipResult(worst <= tol, worst, float(theta[j]))


@dataclass(frozen=True)
class FourierConstraint:
    description: str
    predicate: Callable[[FourierSeries], bool]

    def __call__(self, f: FourierSeries) -> bool:
        return self.predicate(f)


def _sphere_predicate(f: FourierSeries) -> bool:
    keys = set(f.coeffs) | {-k for k in f.coeffs}
    return all(f[k] == f[-k] for k in keys)


def _odd_modes_vanish(f: FourierSeries) -> bool:
    return all(k % 2 == 0 for k in f.coeffs)


def fourier_constraints(preset: SurfacePreset) -> FourierConstraint | None:
    """Closed-form coefficient constraint when one exists, else ``None``."""
    if preset.kind == "sphere":
        return FourierConstraint("f_k = f_{-k} for all k", _sphere_predicate)
    if preset.kind == "nonorientable" and preset.genus == 1:
        return FourierConstraint("f_k = 0 for all odd k", _odd_modes_vanish)
    return None


def _flat(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    """Smooth monotone map [0,1] -> [0,1], flat to all orders at both ends."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _flat(t), _flat(1.0 - t)
    return a / (a + b)


def _arc_parameter(preset: SurfacePreset, arc: int, theta: np.ndarray) -> np.ndarray:
    """Parameter t of each angle on the arc pair ``arc`` (NaN off the pair)."""
    out = np.full(theta.shape, np.nan)
    w = preset.arc_width
    lo = (arc - 1) * w
    on_a = (theta >= lo) & (theta <= lo + w)
    out[on_a] = (theta[on_a] - lo) / w
    if preset.kind == "sphere":
        on_b = theta > math.pi
        out[on_b] = (TWO_PI - theta[on_b]) / math.pi
    elif preset.kind == "orientable":
        start = math.pi + (arc - 1) * w
        on_b = (theta >= start) & (theta <= start + w) & ~on_a
        out[on_b] = arc - (theta[on_b] - math.pi) / w
    else:
        start = TWO_PI - arc * w
        on_b = (theta >= start) & (theta <= start + w) & ~on_a
        out[on_b] = (theta[on_b] - TWO_PI) / w + arc
    return out


def loop_function(preset: SurfacePreset, arc: int, winding: int, theta) -> np.ndarray:
    """Pointwise values of the loop generator (1 off the arc pair)."""
    if not 1 <= arc <= preset.arc_count:
        raise ValueError(f"arc must lie in 1..{preset.arc_count}, got {arc}")
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    t = _arc_parameter(preset, arc, theta)
    vals = np.ones(theta.shape, dtype=complex)
    on = ~np.isnan(t)
    vals[on] = np.exp(2j * math.pi * winding * smoothstep(t[on]))
    return vals


def default_mode_cap(preset: SurfacePreset) -> int:
    """Truncation order used when ``K`` is omitted: 256 per quarter turn of arc width, at least 256."""
    return max(256, 128 * math.ceil(math.pi / preset.arc_width - 1e-9))


def loop_generator(preset: SurfacePreset, arc: int, winding: int, K: int | None = None,
                   samples: int = 4096) -> tuple[FourierSeries, DecayReport]:
    """Smooth symbol winding ``winding`` times along both copies of one arc pair.

    Narrow arcs steepen the reparametrization, so the default ``K`` grows
    with the number of arcs. Returns the numeric Fourier expansion and its
    decay report.
    """
    if not 1 <= arc <= preset.arc_count:
        raise ValueError(f"arc must lie in 1..{preset.arc_count}, got {arc}")
    if K is None:
        K = default_mode_cap(preset)
    samples = max(samples, 8 * K)
    theta = TWO_PI * np.arange(samples) / samples
    return from_samples(loop_function(preset, arc, winding, theta), K)
