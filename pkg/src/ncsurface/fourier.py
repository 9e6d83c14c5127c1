"""Functions on the circle stored by their Fourier coefficients.

A :class:`FourierSeries` is either an *exact* trigonometric polynomial with
Gaussian-rational coefficients, or a *numeric* truncated series carrying a
maximal mode and an estimate of the discarded tail.  ``u`` denotes the
generator ``e^{i theta}``, ``ubar`` its conjugate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .scalars import GaussianRational, I, as_exact

__all__ = [
    "FourierSeries",
    "DecayReport",
    "convolve",
    "differentiate",
    "hat_involution",
    "evaluate",
    "from_samples",
    "decay_report",
    "trig",
    "ONE",
    "U",
    "UBAR",
    "ZERO",
]

DECAY_ORDERS = range(7)
DECAY_THRESHOLD = 1e-2


@dataclass(frozen=True)
class DecayReport:
    """Verdict on how fast a coefficient sequence (or matrix family) decays.

    ``ratios`` maps an exponent pair to the ratio between the weighted sup over
    the outer half of the available modes and over the inner half; a pair
    passes when the ratio is at most ``threshold``.  For a coefficient sequence
    the first exponent weights positive modes and the second negative modes.
    """

    max_mode: int
    verdict: str  # "finite-support" | "rapid" | "slow"
    ratios: Mapping[tuple[int, int], float] = field(default_factory=dict)
    fitted_order: float | None = None
    threshold: float = DECAY_THRESHOLD
    noise_floor: float = 0.0

    @property
    def failing_pairs(self) -> list[tuple[int, int]]:
        return sorted(p for p, r in self.ratios.items() if not r <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "max_mode": self.max_mode,
            "verdict": self.verdict,
            "fitted_order": self.fitted_order,
            "threshold": self.threshold,
            "noise_floor": self.noise_floor,
            "worst_ratio": max(self.ratios.values(), default=0.0),
            "failing_pairs": [list(p) for p in self.failing_pairs],
        }


class FourierSeries:
    """Immutable coefficient map ``k -> f_k`` on the integers."""

    __slots__ = ("_coeffs", "exact", "max_mode", "tail_bound")

    def __init__(self, coeffs: Mapping[int, object], exact: bool, max_mode: int | None = None,
                 tail_bound: float = 0.0):
        if exact:
            data = {}
            for k, v in coeffs.items():
                v = as_exact(v)
                if v:
                    data[int(k)] = v
            max_mode = max((abs(k) for k in data), default=0)
            tail_bound = 0.0
        else:
            data = {}
            for k, v in coeffs.items():
                v = complex(v)
                if v != 0:
                    data[int(k)] = v
            if max_mode is None:
                max_mode = max((abs(k) for k in data), default=0)
            if any(abs(k) > max_mode for k in data):
                raise ValueError("numeric series has modes beyond max_mode")
        object.__setattr__(self, "_coeffs", MappingProxyType(data))
        object.__setattr__(self, "exact", bool(exact))
        object.__setattr__(self, "max_mode", int(max_mode))
        object.__setattr__(self, "tail_bound", float(tail_bound))

    def __setattr__(self, name, value):
        raise AttributeError("FourierSeries is immutable")

    # construction ---------------------------------------------------------

    @classmethod
    def trig(cls, coeffs: Mapping[int, object]) -> "FourierSeries":
        return cls(coeffs, exact=True)

    @classmethod
    def numeric(cls, coeffs, max_mode: int | None = None, tail_bound: float = 0.0) -> "FourierSeries":
        """Numeric series from a dict, or from a dense array indexed ``-K..K``."""
        if not isinstance(coeffs, Mapping):
            arr = np.asarray(coeffs, dtype=complex)
            if arr.ndim != 1 or arr.size % 2 == 0:
                raise ValueError("dense coefficients must have odd length 2K+1")
            K = arr.size // 2
            coeffs = {k: arr[k + K] for k in range(-K, K + 1)}
            max_mode = K if max_mode is None else max_mode
        return cls(coeffs, exact=False, max_mode=max_mode, tail_bound=tail_bound)

    def to_numeric(self) -> "FourierSeries":
        if not self.exact:
            return self
        return FourierSeries({k: complex(v) for k, v in self._coeffs.items()}, exact=False,
                             max_mode=self.max_mode)

    # access ---------------------------------------------------------------

    @property
    def coeffs(self) -> Mapping[int, object]:
        return self._coeffs

    def __getitem__(self, k: int):
        zero = GaussianRational(0) if self.exact else 0j
        return self._coeffs.get(int(k), zero)

    def items(self):
        return sorted(self._coeffs.items())

    @property
    def degree(self) -> int:
        """Largest |k| with a nonzero coefficient (0 for constants and zero)."""
        return max((abs(k) for k in self._coeffs), default=0)

    @property
    def support(self) -> tuple[int, int]:
        if not self._coeffs:
            return (0, 0)
        return (min(self._coeffs), max(self._coeffs))

    def dense(self, K: int | None = None) -> np.ndarray:
        K = self.max_mode if K is None else K
        out = np.zeros(2 * K + 1, dtype=complex)
        for k, v in self._coeffs.items():
            if abs(k) <= K:
                out[k + K] = complex(v)
        return out

    def l1_norm(self) -> float:
        return float(sum(abs(complex(v)) for v in self._coeffs.values()))

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return not self._coeffs
        return all(abs(v) <= tol for v in self._coeffs.values())

    def is_self_adjoint(self) -> bool:
        """Real-valued on the circle: f_{-k} = conj(f_k) for every k."""
        keys = set(self._coeffs) | {-k for k in self._coeffs}
        if self.exact:
            return all(self[-k] == self[k].conjugate() for k in keys)
        return all(abs(complex(self[-k]) - complex(self[k]).conjugate()) <= 1e-14 for k in keys)

    # algebra --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, FourierSeries):
            other = constant(other) if self.exact else constant(other).to_numeric()
        return _combine(self, other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, FourierSeries):
            other = constant(other) if self.exact else constant(other).to_numeric()
        return _combine(self, other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "FourierSeries":
        if self.exact and _is_exactish(c):
            c = as_exact(c)
            return FourierSeries({k: c * v for k, v in self._coeffs.items()}, exact=True)
        c = complex(c)
        src = self.to_numeric()
        return FourierSeries({k: c * v for k, v in src._coeffs.items()}, exact=False,
                             max_mode=src.max_mode, tail_bound=abs(c) * src.tail_bound)

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return convolve(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def bar(self) -> "FourierSeries":
        """Pointwise complex conjugate: coefficient k becomes conj(f_{-k})."""
        if self.exact:
            return FourierSeries({-k: v.conjugate() for k, v in self._coeffs.items()}, exact=True)
        return FourierSeries({-k: v.conjugate() for k, v in self._coeffs.items()}, exact=False,
                             max_mode=self.max_mode, tail_bound=self.tail_bound)

    def hat(self) -> "FourierSeries":
        return hat_involution(self)

    def derivative(self, m: int = 1) -> "FourierSeries":
        return differentiate(self, m)

    def __call__(self, theta):
        return evaluate(self, theta)

    def __eq__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        if self.exact != other.exact:
            return False
        if self.exact:
            return dict(self._coeffs) == dict(other._coeffs)
        return (dict(self._coeffs) == dict(other._coeffs) and self.max_mode == other.max_mode
                and self.tail_bound == other.tail_bound)

    def __hash__(self):
        if self.exact:
            return hash(frozenset(self._coeffs.items()))
        return hash((frozenset(self._coeffs.items()), self.max_mode, self.tail_bound))

    def allclose(self, other: "FourierSeries", tol: float = 1e-10) -> bool:
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(complex(self[k]) - complex(other[k])) <= tol for k in keys)

    def __repr__(self):
        kind = "exact" if self.exact else f"numeric K={self.max_mode}"
        body = ", ".join(f"{k}: {v}" for k, v in self.items()[:8])
        more = ", ..." if len(self._coeffs) > 8 else ""
        return f"FourierSeries({{{body}{more}}}, {kind})"


def _is_exactish(c) -> bool:
    if isinstance(c, GaussianRational):
        return True
    if isinstance(c, complex):
        return False
    try:
        as_exact(c)
    except (TypeError, ValueError):
        return False
    return not isinstance(c, float)


def _combine(f: FourierSeries, g: FourierSeries, sign: int) -> FourierSeries:
    if f.exact and g.exact:
        out = dict(f.coeffs)
        for k, v in g.coeffs.items():
            out[k] = out.get(k, GaussianRational(0)) + (v if sign > 0 else -v)
        return FourierSeries(out, exact=True)
    f, g = f.to_numeric(), g.to_numeric()
    out = dict(f.coeffs)
    for k, v in g.coeffs.items():
        out[k] = out.get(k, 0j) + sign * v
    return FourierSeries(out, exact=False, max_mode=max(f.max_mode, g.max_mode),
                         tail_bound=f.tail_bound + g.tail_bound)


def trig(coeffs: Mapping[int, object]) -> FourierSeries:
    """Exact trigonometric polynomial ``sum_k c_k u^k``."""
    return FourierSeries.trig(coeffs)


def constant(c) -> FourierSeries:
    return FourierSeries.trig({0: c})


ZERO = FourierSeries.trig({})
ONE = FourierSeries.trig({0: 1})
U = FourierSeries.trig({1: 1})
UBAR = FourierSeries.trig({-1: 1})


def convolve(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    """Coefficients of the pointwise product ``f g``."""
    if f.exact and g.exact:
        out: dict[int, GaussianRational] = {}
        for m, a in sorted(f.coeffs.items()):
            for k, b in sorted(g.coeffs.items()):
                out[m + k] = out.get(m + k, GaussianRational(0)) + a * b
        return FourierSeries(out, exact=True)
    f, g = f.to_numeric(), g.to_numeric()
    Kf, Kg = f.max_mode, g.max_mode
    prod = np.convolve(f.dense(Kf), g.dense(Kg))
    tail = f.l1_norm() * g.tail_bound + g.l1_norm() * f.tail_bound + f.tail_bound * g.tail_bound
    return FourierSeries.numeric(prod, max_mode=Kf + Kg, tail_bound=tail)


def differentiate(f: FourierSeries, m: int = 1) -> FourierSeries:
    """m-th derivative in the angle: coefficient k picks up (ik)^m."""
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    if f.exact:
        im = I ** m
        return FourierSeries({k: im * (k ** m) * v for k, v in f.coeffs.items()}, exact=True)
    factor = {k: (1j * k) ** m for k in f.coeffs}
    return FourierSeries({k: factor[k] * v for k, v in f.coeffs.items()}, exact=False,
                         max_mode=f.max_mode, tail_bound=f.tail_bound * float(f.max_mode + 1) ** m)


def hat_involution(f: FourierSeries) -> FourierSeries:
    """``f_hat(z) = conj(f(conj z))``: conjugate every coefficient in place."""
    if f.exact:
        return FourierSeries({k: v.conjugate() for k, v in f.coeffs.items()}, exact=True)
    return FourierSeries({k: v.conjugate() for k, v in f.coeffs.items()}, exact=False,
                         max_mode=f.max_mode, tail_bound=f.tail_bound)


def evaluate(f: FourierSeries, theta):
    """Sum of f_k e^{ik theta}; accepts scalars or arrays of angles."""
    theta_arr = np.asarray(theta, dtype=float)
    out = np.zeros(theta_arr.shape, dtype=complex)
    for k, v in f.items():
        out = out + complex(v) * np.exp(1j * k * theta_arr)
    if np.ndim(theta) == 0:
        return complex(out)
    return out


def from_samples(values, K: int) -> tuple[FourierSeries, DecayReport]:
    """Truncated Fourier series from samples on the grid ``theta_j = 2 pi j / M``.

    The returned tail bound is the l1 mass of every discarded DFT mode, which
    bounds the deviation of the truncated series from the samples on the grid.
    """
    values = np.asarray(values, dtype=complex)
    if values.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    M = values.size
    if K < 0 or M < 2 * K + 2:
        raise ValueError(f"need at least 2K+2 = {2 * K + 2} samples, got {M}")
    c = np.fft.fft(values) / M
    modes = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    keep = np.abs(modes) <= K
    coeffs = {int(k): complex(v) for k, v in zip(modes[keep], c[keep])}
    tail = float(np.sum(np.abs(c[~keep])))
    series = FourierSeries.numeric(coeffs, max_mode=K, tail_bound=tail)
    full = {int(k): complex(v) for k, v in zip(modes, c) if abs(k) < M // 2}
    report = _sequence_report(full, max(M // 2 - 1, 1), scale=float(np.sum(np.abs(c))))
    return series, report


def decay_report(f: FourierSeries, threshold: float = DECAY_THRESHOLD) -> DecayReport:
    if f.exact:
        return DecayReport(max_mode=f.degree, verdict="finite-support", ratios={},
                           fitted_order=None, threshold=threshold)
    return _sequence_report(dict(f.coeffs), f.max_mode, scale=f.l1_norm(),
                            threshold=threshold, extra_floor=f.tail_bound)


def _sequence_report(coeffs: Mapping[int, complex], K: int, scale: float,
                     threshold: float = DECAY_THRESHOLD, extra_floor: float = 0.0) -> DecayReport:
    floor = max(64 * np.finfo(float).eps * max(scale, 1e-300), extra_floor)
    mags = {k: abs(v) for k, v in coeffs.items() if abs(v) > floor}
    if not mags:
        return DecayReport(max_mode=0, verdict="finite-support", ratios={}, threshold=threshold,
                           noise_floor=floor)
    half = K // 2
    ratios: dict[tuple[int, int], float] = {}
    for a in DECAY_ORDERS:
        for b in DECAY_ORDERS:
            head = tail = 0.0
            for k, m in mags.items():
                w = m * (max(k, 1) ** a if k >= 0 else (-k) ** b)
                if abs(k) <= half:
                    head = max(head, w)
                else:
                    tail = max(tail, w)
            ratios[(a, b)] = tail / head if head > 0 else (math.inf if tail > 0 else 0.0)
    verdict = "rapid" if all(r <= threshold for r in ratios.values()) else "slow"
    return DecayReport(max_mode=max(abs(k) for k in mags), verdict=verdict, ratios=ratios,
                       fitted_order=_fit_order(mags, K), threshold=threshold, noise_floor=floor)


def _fit_order(mags: Mapping[int, float], K: int) -> float | None:
    """Least-squares slope of -log|f_k| against log|k| over the outer modes."""
    lo = max(K // 4, 1)
    pts = {}
    for k, m in mags.items():
        if abs(k) >= lo:
            pts[abs(k)] = max(pts.get(abs(k), 0.0), m)
    if len(pts) < 3:
        return None
    x = np.log(np.array(sorted(pts), dtype=float))
    y = np.log(np.array([pts[k] for k in sorted(pts)]))
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
