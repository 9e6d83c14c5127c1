"""Corner-plus-Toeplitz elements of the smooth surface algebra.

Every element is ``K + T_f`` with ``K`` a finite matrix sitting in the top-left
corner of an operator on l2(N) and ``T_f`` the Toeplitz operator with
trigonometric-polynomial symbol ``f``.  For exact inputs products are closed
in this form: the failure of ``f -> T_f`` to be multiplicative is the finite
matrix ``T_{fg} - T_f T_g`` assembled from shift-power defects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fourier import DECAY_ORDERS, ONE, DecayReport, FourierSeries, convolve, evaluate, from_samples
from .scalars import ExactMatrix, as_exact
from .surfaces import SurfacePreset, is_member

__all__ = [
    "CornerMatrix",
    "SurfaceElement",
    "TruncatedOperator",
    "NotInvertibleError",
    "toeplitz_matrix",
    "shift_power",
    "shift_power_defect",
    "multiply",
    "adjoint",
    "add",
    "scale",
    "truncate",
    "winding_number",
    "invert",
    "inversion_residual",
    "rapid_decay_check",
    "support_radius",
]

Matrix = "ExactMatrix | np.ndarray"


class NotInvertibleError(ValueError):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def _is_exact(m) -> bool:
    return isinstance(m, ExactMatrix)


def _dense(m) -> np.ndarray:
    return m.to_numpy() if isinstance(m, ExactMatrix) else np.asarray(m, dtype=complex)


def _zeros_like_kind(exact: bool, n: int, cols: int | None = None):
    cols = n if cols is None else cols
    return ExactMatrix.zeros(n, cols) if exact else np.zeros((n, cols), dtype=complex)


def _pad(m, n: int):
    if isinstance(m, ExactMatrix):
        return m.pad(n)
    out = np.zeros((n, n), dtype=complex)
    r, c = m.shape
    out[:r, :c] = m
    return out


def support_radius(m, tol: float = 0.0) -> int:
    """Side of the smallest top-left square holding every entry above ``tol``."""
    if isinstance(m, ExactMatrix):
        return max(m.support())
    a = np.abs(np.asarray(m))
    nz = a > tol
    rows = np.nonzero(nz.any(axis=1))[0]
    cols = np.nonzero(nz.any(axis=0))[0]
    return max(int(rows[-1]) + 1 if rows.size else 0, int(cols[-1]) + 1 if cols.size else 0)


@dataclass(frozen=True, eq=False)
class CornerMatrix:
    """A d x d matrix embedded in the top-left corner of an operator on l2(N)."""

    entries: object  # ExactMatrix or complex ndarray, square

    def __post_init__(self):
        r, c = self.entries.shape
        if r != c:
            raise ValueError("corner matrices are square")
        if not isinstance(self.entries, ExactMatrix):
            object.__setattr__(self, "entries", np.asarray(self.entries, dtype=complex))

    @classmethod
    def zero(cls, exact: bool = True) -> "CornerMatrix":
        return cls(_zeros_like_kind(exact, 0))

    @classmethod
    def from_entries(cls, rows) -> "CornerMatrix":
        return cls(ExactMatrix.from_entries(rows)).trimmed()

    @classmethod
    def unit(cls, i: int, j: int, value=1) -> "CornerMatrix":
        """``value`` times the matrix unit mapping e_j to e_i."""
        d = max(i, j) + 1
        return cls(ExactMatrix.from_sparse((d, d), {(i, j): value}))

    @classmethod
    def projection(cls, i: int) -> "CornerMatrix":
        """Rank-one projection p_{e_i}."""
        return cls.unit(i, i)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return _is_exact(self.entries)

    def padded(self, n: int):
        if n < self.size:
            raise ValueError(f"corner of size {self.size} does not fit in {n}")
        return _pad(self.entries, n)

    def trimmed(self, tol: float = 0.0) -> "CornerMatrix":
        r = support_radius(self.entries, tol)
        if r == self.size:
            return self
        return CornerMatrix(self.entries[:r, :r])

    def is_zero(self, tol: float = 0.0) -> bool:
        return support_radius(self.entries, tol) == 0

    def __eq__(self, other):
        if not isinstance(other, CornerMatrix):
            return NotImplemented
        a, b = self.trimmed(), other.trimmed()
        if a.size != b.size:
            return False
        if a.exact and b.exact:
            return a.entries == b.entries
        return bool(np.array_equal(_dense(a.entries), _dense(b.entries)))

    __hash__ = None

    def __repr__(self):
        return f"CornerMatrix(size={self.size}, exact={self.exact})"


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Compression of an operator onto span{e_0, ..., e_{n-1}}."""

    n: int
    matrix: object  # ExactMatrix or complex ndarray
    label: str = ""

    @property
    def exact(self) -> bool:
        return _is_exact(self.matrix)

    def to_numpy(self) -> np.ndarray:
        return _dense(self.matrix)

    def interior(self, m: int):
        return self.matrix[:m, :m]

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        a, b = self.matrix, other.matrix
        if _is_exact(a) != _is_exact(b):
            a, b = _dense(a), _dense(b)
        return TruncatedOperator(self.n, a @ b, f"({self.label})({other.label})")

    def __sub__(self, other):
        a, b = self.matrix, other.matrix
        if _is_exact(a) != _is_exact(b):
            a, b = _dense(a), _dense(b)
        return TruncatedOperator(self.n, a - b, f"{self.label} - {other.label}")

    def __add__(self, other):
        a, b = self.matrix, other.matrix
        if _is_exact(a) != _is_exact(b):
            a, b = _dense(a), _dense(b)
        return TruncatedOperator(self.n, a + b, f"{self.label} + {other.label}")

    def norm(self, m: int | None = None) -> float:
        """Largest singular value of the leading m x m block."""
        a = self.to_numpy() if m is None else _dense(self.interior(m))
        if a.size == 0:
            return 0.0
        return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class SurfaceElement:
    """The operator ``compact + T_symbol``; ``symbol`` is its image under sigma."""

    compact: CornerMatrix
    symbol: FourierSeries
    preset: SurfacePreset | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.preset is not None:
            check = is_member(self.preset, self.symbol, grid_size=512, tol=1e-8)
            if not check.member:
                raise ValueError(f"symbol is not in the algebra of {self.preset} "
                                 f"(deviation {check.max_deviation:.3g})")

    # constructors -----------------------------------------------------------

    @classmethod
    def toeplitz(cls, f: FourierSeries, preset: SurfacePreset | None = None, label: str = "") -> "SurfaceElement":
        return cls(CornerMatrix.zero(f.exact), f, preset, label or "T_f")

    @classmethod
    def corner(cls, k: CornerMatrix | ExactMatrix | Sequence, label: str = "") -> "SurfaceElement":
        if not isinstance(k, CornerMatrix):
            k = CornerMatrix(k) if isinstance(k, (ExactMatrix, np.ndarray)) else CornerMatrix.from_entries(k)
        exact_zero = FourierSeries.trig({}) if k.exact else FourierSeries.numeric({}, max_mode=0)
        return cls(k.trimmed(), exact_zero, None, label or "K")

    @classmethod
    def identity(cls) -> "SurfaceElement":
        return cls(CornerMatrix.zero(), ONE, None, "1")

    @classmethod
    def projection(cls, i: int = 0) -> "SurfaceElement":
        return cls.corner(CornerMatrix.projection(i), label=f"p_e{i}")

    # properties -------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.compact.exact and self.symbol.exact

    @property
    def corner_size(self) -> int:
        return self.compact.size

    @property
    def degree(self) -> int:
        """Degree of the symbol (numeric symbols report their max mode)."""
        return self.symbol.degree if self.symbol.exact else self.symbol.max_mode

    # arithmetic sugar ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1, other))

    def __neg__(self):
        return scale(-1, self)

    def __mul__(self, other):
        if isinstance(other, SurfaceElement):
            return multiply(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        return scale(other, self)

    def adjoint(self) -> "SurfaceElement":
        return adjoint(self)

    def with_preset(self, preset: SurfacePreset | None) -> "SurfaceElement":
        return SurfaceElement(self.compact, self.symbol, preset, self.label)

    def __eq__(self, other):
        if not isinstance(other, SurfaceElement):
            return NotImplemented
        return self.compact == other.compact and self.symbol == other.symbol

    __hash__ = None

    def __repr__(self):
        return f"SurfaceElement({self.label or '?'}, corner={self.corner_size}, symbol={self.symbol!r})"


# ---------------------------------------------------------------------------
# truncations


def toeplitz_matrix(f: FourierSeries, n: int) -> TruncatedOperator:
    """Finite section of T_f: entry (k, m) is f_{k-m}."""
    if n < 1:
        raise ValueError("n must be positive")
    if f.exact:
        entries = {}
        for k, v in f.coeffs.items():
            for col in range(max(0, -k), min(n, n - k)):
                entries[(col + k, col)] = v
        return TruncatedOperator(n, ExactMatrix.from_sparse((n, n), entries), "T_f")
    out = np.zeros((n, n), dtype=complex)
    for k, v in f.coeffs.items():
        if abs(k) < n:
            idx = np.arange(max(0, -k), min(n, n - k))
            out[idx + k, idx] = v
    return TruncatedOperator(n, out, "T_f")


def shift_power(k: int, n: int, exact: bool = True) -> TruncatedOperator:
    """Finite section of S^{#k}: S^k for k >= 0 and S*^{|k|} for k < 0."""
    f = FourierSeries.trig({k: 1})
    op = toeplitz_matrix(f if exact else f.to_numeric(), n)
    return TruncatedOperator(n, op.matrix, f"S#{k}")


def shift_power_defect(m: int, k: int) -> CornerMatrix:
    """The finite matrix S^{#(m+k)} - S^{#m} S^{#k}.

    Nonzero only for k < 0 < m.  Then it maps e_i (|k| - min(m, |k|) <= i < |k|)
    to e_{i + m - |k|}: a partial shift between the two low-index projections.
    """
    if not (k < 0 < m):
        return CornerMatrix.zero()
    a = -k
    d = max(m, a)
    entries = {(i + m - a, i): 1 for i in range(max(0, a - m), a)}
    return CornerMatrix(ExactMatrix.from_sparse((d, d), entries))


def truncate(a: SurfaceElement, n: int) -> TruncatedOperator:
    if n < a.corner_size:
        raise ValueError(f"truncation {n} is smaller than the corner size {a.corner_size}")
    t = toeplitz_matrix(a.symbol, n).matrix
    k = a.compact.padded(n)
    if _is_exact(t) != _is_exact(k):
        t, k = _dense(t), _dense(k)
    return TruncatedOperator(n, k + t, a.label)


# ---------------------------------------------------------------------------
# *-algebra operations


def add(a: SurfaceElement, b: SurfaceElement) -> SurfaceElement:
    d = max(a.corner_size, b.corner_size)
    ka, kb = a.compact.padded(d), b.compact.padded(d)
    if _is_exact(ka) != _is_exact(kb):
        ka, kb = _dense(ka), _dense(kb)
    preset = a.preset if a.preset == b.preset else None
    return SurfaceElement(CornerMatrix(ka + kb).trimmed(), a.symbol + b.symbol, preset,
                          f"{a.label}+{b.label}")


def scale(c, a: SurfaceElement) -> SurfaceElement:
    if a.compact.exact and not isinstance(c, (complex, float)):
        k = a.compact.entries.scale(as_exact(c))
    else:
        k = complex(c) * _dense(a.compact.entries)
    return SurfaceElement(CornerMatrix(k).trimmed(), a.symbol.scale(c), a.preset, f"{c}*{a.label}")


def adjoint(a: SurfaceElement) -> SurfaceElement:
    k = a.compact.entries
    k = k.H if _is_exact(k) else k.conj().T
    return SurfaceElement(CornerMatrix(k), a.symbol.bar(), a.preset, f"({a.label})*")


def _defect_corner(f: FourierSeries, g: FourierSeries) -> ExactMatrix:
    """Exact sum of f_m g_k (S^{#(m+k)} - S^{#m} S^{#k})."""
    d = max(f.degree, g.degree, 0)
    total = ExactMatrix.zeros(d)
    for m, fm in f.items():
        if m <= 0:
            continue
        for k, gk in g.items():
            if k >= 0:
                continue
            corner = shift_power_defect(m, k)
            total = total + corner.padded(d).scale(fm * gk)
    return total


def multiply(a: SurfaceElement, b: SurfaceElement) -> SurfaceElement:
    """Operator product, returned again as corner plus Toeplitz part.

    With a = K_a + T_f and b = K_b + T_g the compact part of ab is
    K_a K_b + K_a T_g + T_f K_b - sum f_m g_k (S^{#(m+k)} - S^{#m} S^{#k}).
    """
    f, g = a.symbol, b.symbol
    symbol = convolve(f, g)
    preset = a.preset if a.preset == b.preset else None
    label = f"{a.label}{b.label}"
    da, db = a.corner_size, b.corner_size
    deg_f, deg_g = a.degree, b.degree
    d = max(da + deg_g if da else 0, db + deg_f if db else 0, da, db, deg_f, deg_g)
    if d == 0:
        return SurfaceElement(CornerMatrix.zero(a.exact and b.exact), symbol, preset, label)
    if a.exact and b.exact:
        ka, kb = a.compact.padded(d), b.compact.padded(d)
        tf = toeplitz_matrix(f, d).matrix
        tg = toeplitz_matrix(g, d).matrix
        compact = ka @ kb + ka @ tg + tf @ kb - _defect_corner(f, g).pad(d)
        return SurfaceElement(CornerMatrix(compact).trimmed(), symbol, preset, label)
    # numeric: compress far enough that the finite products are exact on the corner
    inner = d + deg_f + deg_g + 1
    ka, kb = _dense(a.compact.padded(inner)), _dense(b.compact.padded(inner))
    tf = toeplitz_matrix(f.to_numeric(), inner).to_numpy()
    tg = toeplitz_matrix(g.to_numeric(), inner).to_numpy()
    tfg = toeplitz_matrix(symbol.to_numeric(), inner).to_numpy()
    full = (ka + tf) @ (kb + tg) - tfg
    return SurfaceElement(CornerMatrix(full[:d, :d]).trimmed(), symbol, preset, label)


# ---------------------------------------------------------------------------
# winding and inversion


def winding_number(f: FourierSeries, grid: int = 2048) -> int:
    """Number of times the symbol's image loops around 0."""
    theta = 2 * math.pi * np.arange(grid) / grid
    vals = evaluate(f, theta)
    mags = np.abs(vals)
    if mags.min() <= 1e-12 * max(1.0, mags.max()):
        raise NotInvertibleError("vanishing-symbol", "symbol vanishes on the grid; winding undefined")
    steps = np.angle(np.roll(vals, -1) / vals)
    return int(round(float(np.sum(steps)) / (2 * math.pi)))


def inversion_residual(a: SurfaceElement, b: SurfaceElement, n: int) -> float:
    """Spectral norm of truncate(a) truncate(b) - 1 on the rows/cols unaffected by the edge."""
    prod = truncate(a, n).to_numpy() @ truncate(b, n).to_numpy()
    m = n - max(a.degree, 1)
    return float(np.linalg.norm(prod[:m, :m] - np.eye(m), 2))


def invert(a: SurfaceElement, n: int = 256, tol: float = 1e-8) -> SurfaceElement:
    """Numeric inverse inside the algebra: ``T_{1/sigma(a)}`` plus a decaying corner."""
    f = a.symbol
    w = winding_number(f)
    if w != 0:
        raise NotInvertibleError("nonzero-winding",
                                 f"symbol has winding number {w}; the Toeplitz part has index {-w}")
    K = max(n // 2, 1)
    M = max(8 * K, 1024)
    theta = 2 * math.pi * np.arange(M) / M
    h, _ = from_samples(1.0 / evaluate(f, theta), K)
    A = truncate(a, n).to_numpy()
    if np.linalg.cond(A) > 1e12:
        raise NotInvertibleError("truncation", "truncated operator is numerically singular")
    B = np.linalg.solve(A, np.eye(n))
    d = n // 2
    corner = (B - toeplitz_matrix(h, n).to_numpy())[:d, :d]
    corner[np.abs(corner) < 1e-16] = 0
    b = SurfaceElement(CornerMatrix(corner).trimmed(), h, a.preset, f"({a.label})^-1")
    res = inversion_residual(a, b, n)
    if not res < tol:
        raise NotInvertibleError("truncation", f"inversion residual {res:.3g} exceeds {tol:g}")
    return b


# ---------------------------------------------------------------------------
# decay of matrix families


def _weighted_sup(a: np.ndarray, alpha: int, beta: int) -> float:
    if a.size == 0:
        return 0.0
    k = np.arange(a.shape[0], dtype=float)[:, None] ** alpha
    m = np.arange(a.shape[1], dtype=float)[None, :] ** beta
    return float(np.max(k * np.abs(a) * m))


def rapid_decay_check(ops: Sequence[TruncatedOperator], threshold: float = 1e-6) -> DecayReport:
    """Classify a family of truncations x_n by the growth of sup |k^a x_kn n^b|.

    The family is finite-support when its nonzero box no longer grows with n,
    rapid when every weighted sup has converged between the two largest
    truncations, and slow otherwise.
    """
    if len(ops) < 2:
        raise ValueError("need at least two truncation sizes")
    ops = sorted(ops, key=lambda t: t.n)
    mats = [t.to_numpy() for t in ops]
    scale_ = max(float(np.max(np.abs(m))) if m.size else 0.0 for m in mats)
    floor = 1e-13 * scale_
    clean = [np.where(np.abs(m) > floor, m, 0) for m in mats]
    radii = [support_radius(m) for m in clean]
    if radii[-1] == radii[-2] and radii[-1] < ops[0].n:
        return DecayReport(max_mode=radii[-1], verdict="finite-support", ratios={},
                           threshold=threshold, noise_floor=floor)
    ratios = {}
    for alpha in DECAY_ORDERS:
        for beta in DECAY_ORDERS:
            prev = _weighted_sup(clean[-2], alpha, beta)
            last = _weighted_sup(clean[-1], alpha, beta)
            ratios[(alpha, beta)] = (last - prev) / max(last, 1e-300) if last > 0 else 0.0
    verdict = "rapid" if all(r <= threshold for r in ratios.values()) else "slow"
    return DecayReport(max_mode=radii[-1], verdict=verdict, ratios=ratios, threshold=threshold,
                       noise_floor=floor)
