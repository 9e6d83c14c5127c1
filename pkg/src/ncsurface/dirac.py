"""The even spectral triple on l2(N) + l2(N), truncated to n modes per summand.

``D = [[0, S*N], [NS, 0]]`` with ``N e_k = k e_k`` and ``S e_k = e_{k+1}``.
Finite sections of ``NS`` lose the top row, which leaves one spurious zero
mode ``e_{n-1} + 0``; it is reported as a boundary artifact, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import CornerMatrix, SurfaceElement, TruncatedOperator, _dense, _is_exact, truncate
from .fourier import U, UBAR, convolve, differentiate
from .scalars import I, ExactMatrix, block

__all__ = [
    "GradedOperator",
    "DiracTriple",
    "EigenPair",
    "SpectralReport",
    "CommutatorResult",
    "DeltaResult",
    "SummabilityScan",
    "IndexFormulaError",
    "build_dirac",
    "eigenbasis",
    "dirac_pair_blocks",
    "spectrum",
    "spectrum_csv_rows",
    "commutator_D",
    "represent",
    "iterated_delta",
    "summability_scan",
    "partial_sum",
    "fredholm_index",
    "fedosov_index",
]


# ---------------------------------------------------------------------------
# graded operators


def _zeros(exact: bool, n: int):
    return ExactMatrix.zeros(n) if exact else np.zeros((n, n), dtype=complex)


def _mat_is_zero(m, tol: float = 0.0) -> bool:
    if isinstance(m, ExactMatrix):
        return m.is_zero()
    return not np.any(np.abs(m) > tol)


def _matmul(a, b):
    if _is_exact(a) and _is_exact(b):
        return a @ b
    return _dense(a) @ _dense(b)


def _madd(a, b, sign=1):
    if _is_exact(a) and _is_exact(b):
        return a + b if sign > 0 else a - b
    return _dense(a) + sign * _dense(b)


@dataclass(frozen=True, eq=False)
class GradedOperator:
    """Operator on C^n + C^n stored as a 2 x 2 array of n x n blocks."""

    n: int
    blocks: tuple
    label: str = ""

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.blocks)
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise ValueError("blocks must be 2 x 2")
        for r in rows:
            for m in r:
                if m.shape != (self.n, self.n):
                    raise ValueError(f"block of shape {m.shape}, expected {(self.n, self.n)}")
        exact = all(_is_exact(m) for r in rows for m in r)
        if not exact:
            rows = tuple(tuple(_dense(m) for m in r) for r in rows)
        object.__setattr__(self, "blocks", rows)

    @classmethod
    def diag(cls, a, b, label: str = "") -> "GradedOperator":
        n = a.shape[0]
        return cls(n, ((a, _zeros(_is_exact(a), n)), (_zeros(_is_exact(b), n), b)), label)

    @classmethod
    def odd(cls, upper, lower, label: str = "") -> "GradedOperator":
        n = upper.shape[0]
        return cls(n, ((_zeros(_is_exact(upper), n), upper), (lower, _zeros(_is_exact(lower), n))), label)

    @classmethod
    def zero(cls, n: int, exact: bool = True) -> "GradedOperator":
        z = _zeros(exact, n)
        return cls(n, ((z, z), (z, z)), "0")

    @classmethod
    def identity(cls, n: int) -> "GradedOperator":
        return cls.diag(ExactMatrix.identity(n), ExactMatrix.identity(n), "1")

    @property
    def exact(self) -> bool:
        return _is_exact(self.blocks[0][0])

    @property
    def parity(self) -> str:
        diag_zero = _mat_is_zero(self.blocks[0][0]) and _mat_is_zero(self.blocks[1][1])
        off_zero = _mat_is_zero(self.blocks[0][1]) and _mat_is_zero(self.blocks[1][0])
        if off_zero:
            return "even"
        if diag_zero:
            return "odd"
        return "mixed"

    def __getitem__(self, ij):
        i, j = ij
        return self.blocks[i][j]

    def full(self):
        if self.exact:
            return block([list(r) for r in self.blocks])
        return np.block([list(r) for r in self.blocks])

    def to_numpy(self) -> np.ndarray:
        return np.block([[_dense(m) for m in r] for r in self.blocks])

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        out = []
        for i in range(2):
            row = []
            for j in range(2):
                acc = None
                for l in range(2):
                    a, b = self.blocks[i][l], other.blocks[l][j]
                    if _mat_is_zero(a) or _mat_is_zero(b):
                        continue
                    term = _matmul(a, b)
                    acc = term if acc is None else _madd(acc, term)
                if acc is None:
                    acc = _zeros(self.exact and other.exact, self.n)
                row.append(acc)
            out.append(row)
        return GradedOperator(self.n, out, f"{self.label}{other.label}")

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        return GradedOperator(self.n, [[_madd(a, b) for a, b in zip(ra, rb)]
                                       for ra, rb in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return GradedOperator(self.n, [[_madd(a, b, -1) for a, b in zip(ra, rb)]
                                       for ra, rb in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "GradedOperator":
        if self.exact and not isinstance(c, (float, complex)):
            return GradedOperator(self.n, [[m.scale(c) for m in r] for r in self.blocks])
        return GradedOperator(self.n, [[complex(c) * _dense(m) for m in r] for r in self.blocks])

    def interior(self, m: int) -> "GradedOperator":
        return GradedOperator(m, [[b[:m, :m] for b in r] for r in self.blocks], self.label)

    def norm(self, m: int | None = None) -> float:
        op = self if m is None else self.interior(m)
        a = op.to_numpy()
        return float(np.linalg.norm(a, 2)) if a.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(_mat_is_zero(m, tol) for r in self.blocks for m in r)

    def equals(self, other: "GradedOperator", m: int | None = None) -> bool:
        """Exact (or bitwise, for floats) equality on the leading m x m blocks."""
        a = self if m is None else self.interior(m)
        b = other if m is None else other.interior(m)
        return (a - b).is_zero()

    def support_radius(self) -> int:
        from .algebra import support_radius
        return max(support_radius(m) for r in self.blocks for m in r)


# ---------------------------------------------------------------------------
# the triple


def _shift(n: int) -> ExactMatrix:
    return ExactMatrix.from_sparse((n, n), {(k + 1, k): 1 for k in range(n - 1)})


def _number(n: int, offset: int = 0) -> ExactMatrix:
    return ExactMatrix.from_sparse((n, n), {(k, k): k + offset for k in range(n) if k + offset})


@dataclass(frozen=True)
class DiracTriple:
    n: int
    D: GradedOperator
    gamma: GradedOperator
    F: GradedOperator
    absD: GradedOperator
    S: TruncatedOperator
    N: TruncatedOperator


def build_dirac(n: int) -> DiracTriple:
    """Exact finite sections of D, the grading, the phase F and |D|."""
    if n < 2:
        raise ValueError("n must be at least 2")
    S, N = _shift(n), _number(n)
    SstarN = S.H @ N
    NS = N @ S
    D = GradedOperator.odd(SstarN, NS, "D")
    gamma = GradedOperator.diag(ExactMatrix.identity(n), -ExactMatrix.identity(n), "gamma")
    F = GradedOperator.odd(S.H, S, "F")
    absD = GradedOperator.diag(_number(n, 1), N, "|D|")
    return DiracTriple(n, D, gamma, F, absD, TruncatedOperator(n, S, "S"), TruncatedOperator(n, N, "N"))


@dataclass(frozen=True, eq=False)
class EigenPair:
    k: int
    vector: np.ndarray
    boundary: bool = False


def eigenbasis(n: int) -> list[EigenPair]:
    """b_0 = 0 + e_0, b_{+-k} = (+-e_{k-1} + e_k)/sqrt 2, plus the edge mode e_{n-1} + 0."""
    if n < 2:
        raise ValueError("n must be at least 2")
    r = 1.0 / math.sqrt(2.0)
    out = []
    for k in range(-(n - 1), n):
        v = np.zeros(2 * n)
        if k == 0:
            v[n] = 1.0
        else:
            a = abs(k)
            v[a - 1] = r if k > 0 else -r
            v[n + a] = r
        out.append(EigenPair(k, v))
    edge = np.zeros(2 * n)
    edge[n - 1] = 1.0
    out.append(EigenPair(0, edge, boundary=True))
    return out


def dirac_pair_blocks(n: int) -> list[tuple[tuple[int, ...], ExactMatrix]]:
    """Exact block decomposition of the truncated D along (e_{k-1}^+, e_k^-).

    Returns the index tuples (in the 2n-dimensional space) with D restricted
    to them; raises if D has any entry coupling two different blocks.
    """
    Dm = build_dirac(n).D.full()
    groups = [(0 + n,)] + [(k - 1, n + k) for k in range(1, n)] + [(n - 1,)]
    seen = set()
    out = []
    for g in groups:
        sub = ExactMatrix(Dm.re[np.ix_(g, g)].copy(), Dm.im[np.ix_(g, g)].copy(), Dm.den)
        out.append((g, sub))
        seen.update(g)
    mask = np.zeros((2 * n, 2 * n), dtype=bool)
    for g, _ in out:
        mask[np.ix_(g, g)] = True
    leak = (Dm.re != 0) & ~mask
    if np.any(leak) or len(seen) != 2 * n:
        raise AssertionError("truncated D is not block diagonal along the eigenbasis pairs")
    return out


@dataclass(frozen=True)
class BoundaryArtifact:
    eigenvalue: float
    edge_weight: float


@dataclass(frozen=True)
class SpectralReport:
    n: int
    eigenvalues: tuple[float, ...]
    multiplicities: dict
    raw_multiplicities: dict
    boundary_artifacts: tuple[BoundaryArtifact, ...]
    max_deviation: float
    tol: float

    @property
    def simple(self) -> bool:
        return all(c == 1 for c in self.multiplicities.values())


def spectrum(n: int, tol: float = 1e-9, exact: bool = False) -> SpectralReport:
    """Eigenvalues of the truncated D with the edge zero mode flagged.

    ``exact=True`` reads the spectrum off the 2 x 2 blocks of
    :func:`dirac_pair_blocks` instead of calling the dense eigensolver.
    """
    if exact:
        vals = []
        for g, sub in dirac_pair_blocks(n):
            if len(g) == 1:
                vals.append(0)
            else:
                k = sub[0, 1]
                if sub[1, 0] != k or sub[0, 0] or sub[1, 1]:
                    raise AssertionError("unexpected block shape")
                vals.extend([-int(k.re), int(k.re)])
        evals = np.array(sorted(vals), dtype=float)
        vecs = None
    else:
        H = build_dirac(n).D.to_numpy()
        try:
            evals, vecs = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"eigensolver failed at n={n}") from exc
    rounded = np.rint(evals)
    dev = float(np.max(np.abs(evals - rounded)))
    raw: dict = {}
    for x, r in zip(evals, rounded):
        key = int(r) if abs(x - r) <= tol else float(x)
        raw[key] = raw.get(key, 0) + 1
    artifacts = []
    zero_idx = np.nonzero(np.abs(evals) <= tol)[0]
    if vecs is not None and zero_idx.size:
        V = vecs[:, zero_idx]
        w = V[n - 1, :].conj()
        weight = float(np.linalg.norm(w))
        if weight > 0.5:
            artifacts.append(BoundaryArtifact(0.0, weight ** 2))
    elif vecs is None:
        artifacts.append(BoundaryArtifact(0.0, 1.0))
    corrected = dict(raw)
    for art in artifacts:
        corrected[0] -= 1
        if corrected[0] == 0:
            del corrected[0]
    return SpectralReport(n, tuple(float(x) for x in evals), corrected, raw, tuple(artifacts), dev, tol)


def spectrum_csv_rows(report: SpectralReport) -> list[tuple]:
    """Rows (n, eigenvalue, multiplicity, boundary_flag); one edge zero mode flagged."""
    rows = []
    flagged = len(report.boundary_artifacts)
    for x in report.eigenvalues:
        key = int(round(x)) if abs(x - round(x)) <= report.tol else x
        boundary = False
        if flagged and key == 0:
            boundary = True
            flagged -= 1
        mult = report.multiplicities.get(key, 0) if not boundary else 1
        rows.append((report.n, key if isinstance(key, int) else float(x), mult, boundary))
    return rows


# ---------------------------------------------------------------------------
# commutators with D


def _left_SstarN(X: ExactMatrix) -> ExactMatrix:
    n = X.shape[0]
    return X.shift_rows(1).scale_rows(range(1, n + 1))


def _right_SstarN(X: ExactMatrix) -> ExactMatrix:
    n = X.shape[1]
    return X.shift_cols(-1).scale_cols(range(n))


def _left_NS(X: ExactMatrix) -> ExactMatrix:
    n = X.shape[0]
    return X.shift_rows(-1).scale_rows(range(n))


def _right_NS(X: ExactMatrix) -> ExactMatrix:
    n = X.shape[1]
    return X.shift_cols(1).scale_cols(range(1, n + 1))


def _commutators(X, n: int):
    """([S*N, X], [NS, X]) for an n x n finite section X."""
    if _is_exact(X):
        return (_left_SstarN(X) - _right_SstarN(X), _left_NS(X) - _right_NS(X))
    S = _dense(_shift(n))
    N = np.diag(np.arange(n, dtype=float))
    SstarN, NS = S.T @ N, N @ S
    return SstarN @ X - X @ SstarN, NS @ X - X @ NS


@dataclass(frozen=True, eq=False)
class CommutatorResult:
    """Truncated [D, pi(a)] together with its exact corner-plus-Toeplitz blocks."""

    operator: GradedOperator
    upper: SurfaceElement
    lower: SurfaceElement
    interior: int


def represent(a: SurfaceElement, n: int) -> GradedOperator:
    """pi(a) = a + a acting diagonally on both summands."""
    m = truncate(a, n).matrix
    return GradedOperator.diag(m, m, f"pi({a.label})")


def _symbolic_commutators(a: SurfaceElement) -> tuple[SurfaceElement, SurfaceElement]:
    f = a.symbol
    df = differentiate(f, 1)
    mi = -I if f.exact else -1j
    upper_symbol = convolve(UBAR if f.exact else UBAR.to_numeric(), df).scale(mi)
    lower_symbol = convolve(U if f.exact else U.to_numeric(), df).scale(mi)
    d = a.corner_size
    if d == 0:
        ku = kl = CornerMatrix.zero(a.compact.exact)
    else:
        K = a.compact.padded(d + 1)
        cu, cl = _commutators(K, d + 1)
        ku, kl = CornerMatrix(cu).trimmed(), CornerMatrix(cl).trimmed()
    return (SurfaceElement(ku, upper_symbol, None, f"[S*N,{a.label}]"),
            SurfaceElement(kl, lower_symbol, None, f"[NS,{a.label}]"))


def commutator_D(a: SurfaceElement, n: int) -> CommutatorResult:
    """[D, pi(a)] on the n-truncation: upper block [S*N, a], lower block [NS, a].

    For the Toeplitz part the blocks are -i T_{ubar f'} and -i T_{u f'}; the
    corner part stays a corner one size larger.  Finite sections differ from
    the compressed forms only in the last row (upper) or last column (lower),
    so they agree on the leading ``n - 1`` indices whatever the degree.
    """
    X = truncate(a, n).matrix
    up, lo = _commutators(X, n)
    op = GradedOperator.odd(up, lo, f"[D,{a.label}]")
    su, sl = _symbolic_commutators(a)
    return CommutatorResult(op, su, sl, interior=n - 1)


# ---------------------------------------------------------------------------
# regularity


@dataclass(frozen=True, eq=False)
class DeltaResult:
    iterates: list
    symbolic: list
    norms: list[float]
    interior: int


def _delta_weights(n: int, shift: int = 0) -> np.ndarray:
    i = np.arange(n, dtype=object)[:, None]
    j = np.arange(n, dtype=object)[None, :]
    return i - j + shift


def _apply_weights(X, w):
    if _is_exact(X):
        return X.hadamard_int(w)
    return _dense(X) * w.astype(float)


def iterated_delta(x, m: int, n: int | None = None) -> DeltaResult:
    """Iterates of delta(x) = [|D|, x] (or [N, x] for a single-summand element).

    On finite sections N and |D| are diagonal, so every iterate is an exact
    compression of the infinite one.  For ``x = K + T_f`` the symbolic iterate
    is ``[N, K] + (-i)^j T_{f^{(j)}}``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if isinstance(x, SurfaceElement):
        if n is None:
            raise ValueError("truncation size required for an algebra element")
        X = truncate(x, n).matrix
        w = _delta_weights(n)
        iterates, symbolic, norms = [], [], []
        interior = n - 1
        cur, sym = X, x
        for _ in range(m):
            cur = _apply_weights(cur, w)
            sym = _delta_symbolic(sym)
            iterates.append(TruncatedOperator(n, cur, "delta_N"))
            symbolic.append(sym)
            norms.append(float(np.linalg.norm(_dense(cur[:interior, :interior]), 2)))
        return DeltaResult(iterates, symbolic, norms, interior)
    if isinstance(x, GradedOperator):
        nn = x.n
        w = [[_delta_weights(nn), _delta_weights(nn, 1)], [_delta_weights(nn, -1), _delta_weights(nn)]]
        iterates, norms = [], []
        cur = x
        interior = nn - 1
        for _ in range(m):
            cur = GradedOperator(nn, [[_apply_weights(cur.blocks[i][j], w[i][j]) for j in range(2)]
                                      for i in range(2)], "delta_|D|")
            iterates.append(cur)
            norms.append(cur.norm(interior))
        return DeltaResult(iterates, [], norms, interior)
    raise TypeError(f"cannot differentiate {type(x).__name__}")


def _delta_symbolic(a: SurfaceElement) -> SurfaceElement:
    d = a.corner_size
    K = a.compact.entries
    if d:
        K = _apply_weights(K, _delta_weights(d))
    sym = differentiate(a.symbol, 1).scale(-I if a.symbol.exact else -1j)
    return SurfaceElement(CornerMatrix(K).trimmed(), sym, None, f"delta({a.label})")


# ---------------------------------------------------------------------------
# summability


def partial_sum(s: float, K: int) -> float:
    """1 + 2 sum_{k=1..K} (1+k)^{-s}: trace of (1+|D|)^{-s} over |k| <= K."""
    k = np.arange(2, K + 2, dtype=float)
    return 1.0 + 2.0 * math.fsum(k ** (-s))


@dataclass(frozen=True)
class SummabilityScan:
    s: float
    checkpoints: tuple[int, ...]
    partial_sums: tuple[float, ...]
    growth_fit: dict
    converges: bool


def _checkpoints(terms: int) -> list[int]:
    pts = set()
    j = 1
    while 10 ** j <= terms:
        for c in (1, 2, 5):
            if c * 10 ** j <= terms:
                pts.add(c * 10 ** j)
        j += 1
    pts.add(terms)
    return sorted(pts)


def summability_scan(s: float, terms: int, fit_from: int = 1000) -> SummabilityScan:
    """Partial sums of sum_{k in Z} (1+|k|)^{-s} over the spectrum of D.

    For s = 1 a least-squares fit ``c ln K + d`` over checkpoints K >= fit_from
    witnesses the logarithmic divergence; for s > 1 successive Cauchy tails and
    the integral tail bound 2 (1+K)^{1-s} / (s-1) are reported.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if terms < 10:
        raise ValueError("need at least 10 terms")
    k = np.arange(2, terms + 2, dtype=float)
    cums = 1.0 + 2.0 * np.cumsum(k ** (-s))
    pts = _checkpoints(terms)
    sums = [float(cums[K - 1]) for K in pts]
    if s <= 1.0:
        sel = [(K, v) for K, v in zip(pts, sums) if K >= fit_from] or list(zip(pts, sums))
        x = np.log([K for K, _ in sel])
        y = np.array([v for _, v in sel])
        if len(sel) >= 2:
            c, d = np.polyfit(x, y, 1)
            resid = float(np.max(np.abs(c * x + d - y)))
        else:
            c, d, resid = float("nan"), float("nan"), float("nan")
        fit = {"model": "c*ln(K)+d", "c": float(c), "d": float(d), "max_residual": resid,
               "range": [int(sel[0][0]), int(sel[-1][0])]}
        return SummabilityScan(s, tuple(pts), tuple(sums), fit, converges=False)
    tails = [b - a for a, b in zip(sums, sums[1:])]
    decades = [K for K in pts if K in {10 ** j for j in range(1, 20)}]
    decade_tails = []
    for a, b in zip(decades, decades[1:]):
        decade_tails.append({"from": a, "to": b,
                             "tail": float(cums[b - 1] - cums[a - 1])})
    bound = 2.0 * (1.0 + pts[-1]) ** (1.0 - s) / (s - 1.0)
    fit = {"model": "cauchy", "tails": tails, "decade_tails": decade_tails,
           "tail_bound_at_last": bound,
           "decreasing": all(t2 <= t1 for t1, t2 in zip([d["tail"] for d in decade_tails],
                                                        [d["tail"] for d in decade_tails][1:]))}
    return SummabilityScan(s, tuple(pts), tuple(sums), fit, converges=True)


# ---------------------------------------------------------------------------
# index


class IndexFormulaError(ValueError):
    """Defects of the operator are not (near-)projections."""


def fedosov_index(T, interior_mask: np.ndarray, p: int = 1, tol: float = 1e-9) -> int:
    """tr(1 - T*T)^p - tr(1 - TT*)^p, traced over ``interior_mask`` only."""
    mask = np.asarray(interior_mask, dtype=bool)
    n = mask.size
    if _is_exact(T):
        Id = ExactMatrix.identity(n)
        E1, E2 = Id - T.H @ T, Id - T @ T.H
        for E in (E1, E2):
            if not (E @ E - E).is_zero():
                raise IndexFormulaError("defect operators are not projections")
        P1, P2 = E1, E2
        for _ in range(p - 1):
            P1, P2 = P1 @ E1, P2 @ E2
        idx = np.nonzero(mask)[0]
        t1 = sum((P1[int(i), int(i)] for i in idx), start=0)
        t2 = sum((P2[int(i), int(i)] for i in idx), start=0)
        val = t1 - t2
        if val.im != 0 or val.re.denominator != 1:
            raise IndexFormulaError(f"non-integral trace difference {val}")
        return int(val.re)
    A = _dense(T)
    if np.linalg.norm(A, 2) > 1 + tol:
        raise IndexFormulaError("operator norm exceeds 1; not a partial isometry modulo finite rank")
    Id = np.eye(n)
    E1, E2 = Id - A.conj().T @ A, Id - A @ A.conj().T
    for E in (E1, E2):
        if np.linalg.norm(E @ E - E, 2) > 1e3 * tol:
            raise IndexFormulaError("defect operators are not near-idempotent")
    P1 = np.linalg.matrix_power(E1, p)
    P2 = np.linalg.matrix_power(E2, p)
    val = float(np.real(np.trace(P1[np.ix_(mask, mask)]) - np.trace(P2[np.ix_(mask, mask)])))
    r = round(val)
    if abs(val - r) > 1e-6:
        raise IndexFormulaError(f"non-integral trace difference {val}")
    return int(r)


def fredholm_index(T: TruncatedOperator, p: int = 1, margin: int = 1, tol: float = 1e-9) -> int:
    """Index of a truncated near-isometry, discarding defects in the last ``margin`` indices.

    The finite section of S* keeps its genuine defect 1 - SS* = p_{e0} while
    S* S loses e_{n-1}; that edge defect is an artifact of truncation.
    """
    n = T.n
    mask = np.arange(n) < n - margin
    return fedosov_index(T.matrix, mask, p=p, tol=tol)
