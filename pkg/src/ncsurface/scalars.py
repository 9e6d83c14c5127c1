"""Exact Gaussian-rational scalars and matrices.

Scalars are complex numbers with rational real and imaginary parts.  Matrices
store integer numerators for both parts over one shared positive denominator,
which keeps products on Python ints (no per-entry gcd work) and makes equality
a plain comparison of normalized arrays.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from functools import reduce

import numpy as np

__all__ = ["GaussianRational", "ExactMatrix", "I", "as_exact", "is_exact_scalar"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        return Fraction(x)
    raise TypeError(f"unsupported scalar {x!r}")


class GaussianRational:
    """Immutable element of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(x.real, x.imag)
        return cls(x, 0)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


I = GaussianRational(0, 1)


def is_exact_scalar(x) -> bool:
    return isinstance(x, (GaussianRational, numbers.Rational))


def as_exact(x) -> GaussianRational:
    """Convert ints, Fractions, or complex numbers with dyadic parts to Q(i)."""
    return GaussianRational.coerce(x)


def _int_array(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(0)
    return out


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


class ExactMatrix:
    """Dense matrix over Q(i): ``(re + i*im) / den`` with integer arrays."""

    __slots__ = ("re", "im", "den")

    def __init__(self, re: np.ndarray, im: np.ndarray, den: int = 1, *, _normalize=True):
        if re.shape != im.shape or re.ndim != 2:
            raise ValueError("re/im must be 2-d arrays of equal shape")
        if den <= 0:
            raise ValueError("denominator must be positive")
        self.re = re
        self.im = im
        self.den = int(den)
        if _normalize:
            self._normalize()

    def _normalize(self):
        if self.den == 1:
            return
        g = self.den
        for v in self.re.flat:
            if g == 1:
                break
            g = math.gcd(g, v)
        for v in self.im.flat:
            if g == 1:
                break
            g = math.gcd(g, v)
        if g > 1:
            self.re = self.re // g
            self.im = self.im // g
            self.den //= g

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "ExactMatrix":
        cols = rows if cols is None else cols
        return cls(_int_array((rows, cols)), _int_array((rows, cols)), 1, _normalize=False)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        m = cls.zeros(n)
        for i in range(n):
            m.re[i, i] = 1
        return m

    @classmethod
    def from_entries(cls, rows) -> "ExactMatrix":
        rows = [[as_exact(x) for x in row] for row in rows]
        r = len(rows)
        c = len(rows[0]) if r else 0
        if any(len(row) != c for row in rows):
            raise ValueError("ragged rows")
        den = 1
        for row in rows:
            for x in row:
                den = _lcm(den, x.re.denominator)
                den = _lcm(den, x.im.denominator)
        re, im = _int_array((r, c)), _int_array((r, c))
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                re[i, j] = x.re.numerator * (den // x.re.denominator)
                im[i, j] = x.im.numerator * (den // x.im.denominator)
        return cls(re, im, den, _normalize=False)

    @classmethod
    def from_sparse(cls, shape, entries: dict) -> "ExactMatrix":
        """Build from ``{(i, j): scalar}``."""
        rows, cols = shape
        vals = {ij: as_exact(v) for ij, v in entries.items()}
        den = 1
        for x in vals.values():
            den = _lcm(den, x.re.denominator)
            den = _lcm(den, x.im.denominator)
        re, im = _int_array((rows, cols)), _int_array((rows, cols))
        for (i, j), x in vals.items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry {(i, j)} outside shape {shape}")
            re[i, j] = x.re.numerator * (den // x.re.denominator)
            im[i, j] = x.im.numerator * (den // x.im.denominator)
        return cls(re, im, den, _normalize=False)

    @classmethod
    def from_int_array(cls, a) -> "ExactMatrix":
        a = np.asarray(a)
        re = _int_array(a.shape)
        im = _int_array(a.shape)
        for idx, v in np.ndenumerate(a):
            re[idx] = int(v)
        return cls(re, im, 1, _normalize=False)

    # basic protocol -------------------------------------------------------

    @property
    def shape(self):
        return self.re.shape

    def copy(self) -> "ExactMatrix":
        return ExactMatrix(self.re.copy(), self.im.copy(), self.den, _normalize=False)

    def __getitem__(self, key):
        if isinstance(key, tuple) and len(key) == 2 and all(isinstance(k, (int, np.integer)) for k in key):
            return GaussianRational(Fraction(int(self.re[key]), self.den),
                                    Fraction(int(self.im[key]), self.den))
        re = self.re[key]
        im = self.im[key]
        if re.ndim != 2:
            raise IndexError("ExactMatrix slicing must keep two dimensions")
        return ExactMatrix(re.copy(), im.copy(), self.den)

    def to_numpy(self) -> np.ndarray:
        re = self.re.astype(float) / self.den
        im = self.im.astype(float) / self.den
        return re + 1j * im

    def __array__(self, dtype=None, copy=None):
        out = self.to_numpy()
        return out.astype(dtype) if dtype is not None else out

    def __repr__(self):
        return f"ExactMatrix(shape={self.shape}, den={self.den})"

    def tolist(self):
        r, c = self.shape
        return [[self[i, j] for j in range(c)] for i in range(r)]

    # arithmetic -----------------------------------------------------------

    def _aligned(self, other: "ExactMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        den = _lcm(self.den, other.den)
        a, b = den // self.den, den // other.den
        return den, a, b

    def __add__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        den, a, b = self._aligned(other)
        return ExactMatrix(self.re * a + other.re * b, self.im * a + other.im * b, den)

    def __sub__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        den, a, b = self._aligned(other)
        return ExactMatrix(self.re * a - other.re * b, self.im * a - other.im * b, den)

    def __neg__(self):
        return ExactMatrix(-self.re, -self.im, self.den, _normalize=False)

    def scale(self, c) -> "ExactMatrix":
        c = as_exact(c)
        cd = _lcm(c.re.denominator, c.im.denominator)
        cr = c.re.numerator * (cd // c.re.denominator)
        ci = c.im.numerator * (cd // c.im.denominator)
        return ExactMatrix(self.re * cr - self.im * ci, self.re * ci + self.im * cr, self.den * cd)

    def __mul__(self, c):
        if isinstance(c, ExactMatrix):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.shape[1] == 0:
            return ExactMatrix.zeros(self.shape[0], other.shape[1])
        rr = np.dot(self.re, other.re)
        ii = np.dot(self.im, other.im)
        ri = np.dot(self.re, other.im)
        ir = np.dot(self.im, other.re)
        return ExactMatrix(rr - ii, ri + ir, self.den * other.den)

    def conj(self) -> "ExactMatrix":
        return ExactMatrix(self.re.copy(), -self.im, self.den, _normalize=False)

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.re.T.copy(), self.im.T.copy(), self.den, _normalize=False)

    @property
    def H(self) -> "ExactMatrix":
        return ExactMatrix(self.re.T.copy(), -self.im.T, self.den, _normalize=False)

    def trace(self) -> GaussianRational:
        n = min(self.shape)
        return GaussianRational(Fraction(int(sum(self.re[i, i] for i in range(n))), self.den),
                                Fraction(int(sum(self.im[i, i] for i in range(n))), self.den))

    # structured operations used by the operator layer -----------------------

    def scale_rows(self, weights) -> "ExactMatrix":
        w = np.array([int(x) for x in weights], dtype=object)[:, None]
        return ExactMatrix(self.re * w, self.im * w, self.den)

    def scale_cols(self, weights) -> "ExactMatrix":
        w = np.array([int(x) for x in weights], dtype=object)[None, :]
        return ExactMatrix(self.re * w, self.im * w, self.den)

    def hadamard_int(self, weights: np.ndarray) -> "ExactMatrix":
        return ExactMatrix(self.re * weights, self.im * weights, self.den)

    def shift_rows(self, k: int) -> "ExactMatrix":
        """Row i of the result is row i+k of self (zero-filled)."""
        return ExactMatrix(_shift(self.re, k, 0), _shift(self.im, k, 0), self.den, _normalize=False)

    def shift_cols(self, k: int) -> "ExactMatrix":
        """Column j of the result is column j+k of self (zero-filled)."""
        return ExactMatrix(_shift(self.re, k, 1), _shift(self.im, k, 1), self.den, _normalize=False)

    def pad(self, rows: int, cols: int | None = None) -> "ExactMatrix":
        cols = rows if cols is None else cols
        r, c = self.shape
        if rows < r or cols < c:
            raise ValueError(f"cannot pad {self.shape} down to {(rows, cols)}")
        re, im = _int_array((rows, cols)), _int_array((rows, cols))
        re[:r, :c] = self.re
        im[:r, :c] = self.im
        return ExactMatrix(re, im, self.den, _normalize=False)

    # predicates -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not (np.any(self.re != 0) or np.any(self.im != 0))

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def support(self) -> tuple[int, int]:
        """Smallest (rows, cols) such that all nonzeros lie in that top-left box."""
        nz = (self.re != 0) | (self.im != 0)
        rows = np.nonzero(nz.any(axis=1))[0]
        cols = np.nonzero(nz.any(axis=0))[0]
        return (int(rows[-1]) + 1 if rows.size else 0,
                int(cols[-1]) + 1 if cols.size else 0)

    def frobenius2(self) -> Fraction:
        total = sum(int(v) * int(v) for v in self.re.flat) + sum(int(v) * int(v) for v in self.im.flat)
        return Fraction(total, self.den * self.den)


def _shift(a: np.ndarray, k: int, axis: int) -> np.ndarray:
    out = _int_array(a.shape)
    n = a.shape[axis]
    if k == 0:
        return a.copy()
    if abs(k) >= n:
        return out
    if axis == 0:
        if k > 0:
            out[: n - k, :] = a[k:, :]
        else:
            out[-k:, :] = a[: n + k, :]
    else:
        if k > 0:
            out[:, : n - k] = a[:, k:]
        else:
            out[:, -k:] = a[:, : n + k]
    return out


def block(rows) -> ExactMatrix:
    """Assemble a block matrix from a nested list of ExactMatrix."""
    den = reduce(_lcm, (m.den for row in rows for m in row), 1)
    re = np.block([[m.re * (den // m.den) for m in row] for row in rows])
    im = np.block([[m.im * (den // m.den) for m in row] for row in rows])
    return ExactMatrix(re.astype(object), im.astype(object), den)
