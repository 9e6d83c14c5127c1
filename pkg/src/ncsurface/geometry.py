"""Finiteness, Hochschild chains with the orientation obstruction, and the index pairing."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (CornerMatrix, SurfaceElement, _dense, _is_exact, adjoint, multiply,
                      truncate)
from .dirac import GradedOperator, _symbolic_commutators, build_dirac, commutator_D, fedosov_index, represent
from .fourier import FourierSeries, convolve
from .real_structure import AntiUnitary, build_J, conjugate_element
from .scalars import GaussianRational

__all__ = [
    "HochschildChain",
    "ProjectionMatrix",
    "PairingInput",
    "PairingResult",
    "IsometryCheck",
    "OrientationResult",
    "ParityObstruction",
    "PairingError",
    "finiteness_phi",
    "finiteness_isometry_check",
    "hochschild_boundary",
    "pi_D_evaluate",
    "orientation_obstruction",
    "pairing_report",
    "pairing_index",
    "k0_battery",
]


# ---------------------------------------------------------------------------
# finiteness


def finiteness_phi(a: SurfaceElement, n: int):
    """Phi(a) = a(1 - SS*) e_0 = a e_0, the first column of the truncation."""
    col = truncate(a, n).matrix[:, :1]
    return col


@dataclass(frozen=True)
class IsometryCheck:
    lhs: object
    rhs: object
    equal: bool


def _psi0(x: SurfaceElement):
    """<e_0, x e_0>."""
    v = x.symbol[0]
    if x.corner_size:
        v = v + x.compact.entries[0, 0]
    return v


def finiteness_isometry_check(a: SurfaceElement, n: int) -> IsometryCheck:
    """||Phi(a)||^2 against psi_0((a p)*(a p)) with p = 1 - SS* = p_{e_0}."""
    if n < a.corner_size + a.degree + 1:
        raise ValueError("truncation too small to hold the first column")
    col = finiteness_phi(a, n)
    ap = multiply(a, SurfaceElement.projection(0))
    rhs = _psi0(multiply(adjoint(ap), ap))
    if _is_exact(col) and a.exact:
        lhs = GaussianRational(col.frobenius2())
        return IsometryCheck(lhs, rhs, lhs == rhs)
    lhs = float(np.sum(np.abs(_dense(col)) ** 2))
    rhs = complex(rhs)
    return IsometryCheck(lhs, rhs, abs(lhs - rhs) <= 1e-10 * max(1.0, lhs))


# ---------------------------------------------------------------------------
# Hochschild chains


@dataclass(frozen=True, eq=False)
class HochschildChain:
    """Sum of tensors a_0 (x) b (x) a_1 (x) ... (x) a_n; signs live in a_0."""

    degree: int
    terms: tuple = ()

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        for t in terms:
            if len(t) != self.degree + 2:
                raise ValueError(f"term has {len(t)} slots; degree {self.degree} needs {self.degree + 2}")
        object.__setattr__(self, "terms", terms)

    def expand(self) -> dict:
        """Canonical form: basis-label tuple -> nonzero exact coefficient."""
        out: dict = {}
        for t in self.terms:
            slots = [_basis_terms(x) for x in t]
            for combo in itertools.product(*slots):
                key = tuple(lab for lab, _ in combo)
                c = GaussianRational(1)
                for _, v in combo:
                    c = c * v
                out[key] = out.get(key, GaussianRational(0)) + c
        return {k: v for k, v in out.items() if v}

    def is_zero(self) -> bool:
        return not self.expand()

    def __add__(self, other: "HochschildChain") -> "HochschildChain":
        if other.degree != self.degree:
            raise ValueError("degrees differ")
        return HochschildChain(self.degree, self.terms + other.terms)

    def __len__(self):
        return len(self.terms)


def _basis_terms(a: SurfaceElement) -> list:
    if not a.exact:
        raise ValueError("canonical expansion needs exact elements")
    out = []
    K = a.compact.entries
    if a.corner_size:
        for i in range(K.shape[0]):
            for j in range(K.shape[1]):
                v = K[i, j]
                if v:
                    out.append((("E", i, j), v))
    for k, v in a.symbol.items():
        out.append((("T", k), v))
    return out


def hochschild_boundary(omega: HochschildChain) -> HochschildChain:
    """b(a_0, b, a_1..a_n) = (a_0, b a_1, ..) + sum_k (-1)^k (.., a_k a_{k+1}, ..) + (-1)^n (a_n a_0, b, ..)."""
    n = omega.degree
    if n < 1:
        raise ValueError("boundary needs degree >= 1")
    out = []
    for t in omega.terms:
        a0, b, rest = t[0], t[1], list(t[2:])
        out.append((a0, multiply(b, rest[0]), *rest[1:]))
        for k in range(1, n):
            merged = rest[:k - 1] + [multiply(rest[k - 1], rest[k])] + rest[k + 1:]
            out.append((-a0 if k % 2 else a0, b, *merged))
        wrap = multiply(rest[-1], a0)
        out.append((wrap if n % 2 == 0 else -wrap, b, *rest[:-1]))
    return HochschildChain(n - 1, out)


# ---------------------------------------------------------------------------
# orientation


class ParityObstruction(ValueError):
    """An odd-degree chain represents to an odd operator, which can never equal gamma."""


def _opposite_factor(b: SurfaceElement) -> SurfaceElement:
    """The element with J pi(b*) J^{-1} = pi(.)."""
    return conjugate_element(adjoint(b))


def pi_D_evaluate(omega: HochschildChain, J: AntiUnitary | None, n: int,
                  exact: bool | None = None) -> GradedOperator:
    """Sum over terms of pi(a_0) J pi(b*) J^{-1} [D, a_1] ... [D, a_n] on the n-truncation."""
    J = J or build_J(n)
    if exact is None:
        exact = n <= 32 and all(x.exact for t in omega.terms for x in t)
    total = GradedOperator.zero(n, exact)
    for t in omega.terms:
        a0, b, rest = t[0], t[1], t[2:]
        op = represent(a0, n) @ J.conjugate(represent(adjoint(b), n))
        if not exact:
            op = GradedOperator(n, [[m.to_numpy() if _is_exact(m) else m for m in r] for r in op.blocks])
        for a in rest:
            c = commutator_D(a, n).operator
            op = op @ c
        total = total + op
    return total


@dataclass(frozen=True, eq=False)
class OrientationResult:
    diag_top: FourierSeries
    diag_bottom: FourierSeries
    residual: float
    interior: int
    verdict: str

    @property
    def diagonals_agree(self) -> bool:
        return self.diag_top == self.diag_bottom


def _leading_symbols(a: SurfaceElement) -> tuple[FourierSeries, FourierSeries]:
    """Symbols of [S*N, a] and [NS, a]: -i ubar sigma(a)' and -i u sigma(a)'."""
    upper, lower = _symbolic_commutators(a)
    return upper.symbol, lower.symbol


def orientation_obstruction(omega: HochschildChain, J: AntiUnitary | None, n: int,
                            tol: float = 1e-9) -> OrientationResult:
    """Symbol-level diagonals of pi_D(omega) and the distance from gamma.

    An even product [D,a_1]...[D,a_{2k}] is block diagonal with top block
    X_1 Y_2 X_3 ... and bottom block Y_1 X_2 Y_3 ..., where X, Y are the
    [S*N, .] and [NS, .] blocks.  Their symbols differ only in where the
    factors u and ubar sit, so both diagonals carry the same symbol, whereas
    gamma needs +1 on top and -1 below.
    """
    if omega.degree % 2:
        raise ParityObstruction(f"degree {omega.degree} chain represents to an odd operator")
    exact = all(x.exact for t in omega.terms for x in t)
    zero = FourierSeries.trig({}) if exact else FourierSeries.numeric({}, max_mode=0)
    top, bottom = zero, zero
    for t in omega.terms:
        a0, b, rest = t[0], t[1], t[2:]
        lead = convolve(a0.symbol, _opposite_factor(b).symbol)
        ft, fb = lead, lead
        for pos, a in enumerate(rest):
            up, lo = _leading_symbols(a)
            if pos % 2 == 0:
                ft, fb = convolve(ft, up), convolve(fb, lo)
            else:
                ft, fb = convolve(ft, lo), convolve(fb, up)
        top, bottom = top + ft, bottom + fb
    J = J or build_J(n)
    op = pi_D_evaluate(omega, J, n)
    spread = max((sum(x.degree + x.corner_size for x in t) for t in omega.terms), default=0)
    m = max(n - spread - omega.degree - 2, 1)
    gamma = build_dirac(n).gamma
    residual = (gamma - op).norm(m)
    verdict = "obstructed" if residual >= 1 - tol else "not-obstructed"
    return OrientationResult(top, bottom, residual, m, verdict)


# ---------------------------------------------------------------------------
# index pairing


class PairingError(ValueError):
    """Compression is not near-Fredholm or did not stabilize."""


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    name: str
    entries: tuple  # square tuple-of-tuples of SurfaceElement

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("projection matrix must be square")
        object.__setattr__(self, "entries", rows)

    @property
    def size(self) -> int:
        return len(self.entries)

    def product(self, other: "ProjectionMatrix") -> list:
        k = self.size
        out = []
        for i in range(k):
            row = []
            for j in range(k):
                acc = None
                for l in range(k):
                    term = multiply(self.entries[i][l], other.entries[l][j])
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return out

    def is_projection(self) -> bool:
        sq = self.product(self)
        for i in range(self.size):
            for j in range(self.size):
                if sq[i][j] != self.entries[i][j]:
                    return False
                if adjoint(self.entries[j][i]) != self.entries[i][j]:
                    return False
        return True

    def is_finite_corner(self) -> bool:
        return all(x.symbol.is_zero() for r in self.entries for x in r)


def _diag(name: str, elems: Sequence[SurfaceElement]) -> ProjectionMatrix:
    zero = SurfaceElement.corner(CornerMatrix.zero())
    k = len(elems)
    return ProjectionMatrix(name, [[elems[i] if i == j else zero for j in range(k)] for i in range(k)])


def k0_battery() -> list[ProjectionMatrix]:
    one = SurfaceElement.identity()
    p0, p1 = SurfaceElement.projection(0), SurfaceElement.projection(1)
    return [
        _diag("one", [one]),
        _diag("p_e0", [p0]),
        _diag("p_e1", [p1]),
        _diag("1-p_e0", [one - p0]),
        _diag("diag(p_e0,p_e1)", [p0, p1]),
        _diag("diag(1,p_e0)", [one, p0]),
    ]


@dataclass(frozen=True, eq=False)
class PairingInput:
    P: ProjectionMatrix
    Q: ProjectionMatrix

    def __post_init__(self):
        for M in (self.P, self.Q):
            if not M.is_projection():
                raise ValueError(f"{M.name} is not a projection")


@dataclass(frozen=True)
class PairingResult:
    index: int
    n: int
    indices: tuple[int, int]
    ranks: tuple[int, int]
    finite_dimensional: bool
    phase: str = "S*"


def _compressed_phase(inp: PairingInput, J: AntiUnitary, n: int):
    kP, kQ = inp.P.size, inp.Q.size
    blocks_P = [[truncate(x, n).to_numpy() for x in r] for r in inp.P.entries]
    # J pi(Q_kl) J^{-1} on the even summand
    blocks_Q = [[J.conjugate(represent(x, n)).to_numpy()[:n, :n] for x in r] for r in inp.Q.entries]
    dim = n * kP * kQ
    E = np.zeros((dim, dim), dtype=complex)
    for i in range(kP):
        for k in range(kQ):
            for j in range(kP):
                for l in range(kQ):
                    r, c = (i * kQ + k) * n, (j * kQ + l) * n
                    E[r:r + n, c:c + n] = blocks_P[i][j] @ blocks_Q[k][l]
    if np.linalg.norm(E @ E - E, 2) > 1e-9 or np.linalg.norm(E - E.conj().T, 2) > 1e-9:
        raise PairingError("compressed projection is not idempotent; entries fail to commute")
    Sstar = _dense(build_dirac(n).S.matrix).T
    amb = np.kron(np.eye(kP * kQ), Sstar)
    T = E @ amb @ E + (np.eye(dim) - E)
    mask = np.tile(np.arange(n) < n - 1, kP * kQ)
    rank = int(round(float(np.real(np.trace(E)))))
    return T, mask, rank


def pairing_report(inp: PairingInput, J: AntiUnitary | None, n: int) -> PairingResult:
    """Index of E (S* (x) 1) E + (1 - E) with E = pi(P) (x) J pi(Q) J^{-1}.

    The bounded phase S* of the odd block of D stands in for the unbounded
    S*N.  The computation runs at n and 2n and must agree; when the rank of E
    does not grow the compressed space is finite-dimensional and the index
    is 0.
    """
    results = []
    for m in (n, 2 * n):
        Jm = build_J(m) if J is None or J.n != m else J
        T, mask, rank = _compressed_phase(inp, Jm, m)
        try:
            idx = fedosov_index(T, mask, p=1, tol=1e-9)
        except ValueError as exc:
            raise PairingError(str(exc)) from exc
        results.append((idx, rank))
    (i1, r1), (i2, r2) = results
    if i1 != i2:
        raise PairingError(f"index did not stabilize: {i1} at n={n}, {i2} at n={2 * n}")
    finite = r1 == r2
    if finite and i1 != 0:
        raise PairingError("finite-dimensional compression with nonzero index")
    return PairingResult(0 if finite else i1, n, (i1, i2), (r1, r2), finite)


def pairing_index(inp: PairingInput, J: AntiUnitary | None, n: int) -> int:
    return pairing_report(inp, J, n).index
