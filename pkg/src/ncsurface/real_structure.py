"""The anti-unitary J with J b_k = b_{-k}, first-order defects, and rigidity witnesses.

An anti-unitary is stored as ``v -> C conj(v)`` with ``C`` unitary; the
canonical choice is ``C = diag(-1, +1)`` on the two summands.  Conjugation of
an operator is then ``X -> C conj(X) C*``, which keeps exact inputs exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import CornerMatrix, SurfaceElement, _dense, _is_exact, multiply, truncate
from .dirac import GradedOperator, _commutators, _symbolic_commutators, build_dirac, represent
from .fourier import DecayReport
from .scalars import ExactMatrix

__all__ = [
    "AntiUnitary",
    "ConjugationResult",
    "FirstOrderDefect",
    "build_J",
    "conjugate_element",
    "conjugate_by_J",
    "j_gamma_relation",
    "first_order_defect",
    "support_bound",
    "commutant_dimension",
    "eigen_multiplicity_witness",
]


def _split(n: int, M) -> GradedOperator:
    return GradedOperator(n, [[M[:n, :n], M[:n, n:]], [M[n:, :n], M[n:, n:]]])


@dataclass(frozen=True, eq=False)
class AntiUnitary:
    n: int
    linear_part: ExactMatrix

    def __post_init__(self):
        C = self.linear_part
        if C.shape != (2 * self.n, 2 * self.n):
            raise ValueError("linear part must be 2n x 2n")
        if self._diagonal_signs() is None and not (C @ C.H == ExactMatrix.identity(2 * self.n)):
            raise ValueError("linear part is not unitary")

    def apply(self, v) -> np.ndarray:
        return self.linear_part.to_numpy() @ np.conj(np.asarray(v, dtype=complex))

    __call__ = apply

    def _diagonal_signs(self) -> list[int] | None:
        """Diagonal of C when C = diag(+-1), else None."""
        C = self.linear_part
        if C.den != 1 or np.any(C.im != 0):
            return None
        d = [int(x) for x in np.diagonal(C.re)]
        off = C.re.copy()
        np.fill_diagonal(off, 0)
        if np.any(off != 0) or any(x not in (1, -1) for x in d):
            return None
        return d

    def square(self) -> ExactMatrix:
        """Linear map J^2 = C conj(C)."""
        return self.linear_part @ self.linear_part.conj()

    def conjugate(self, X: GradedOperator) -> GradedOperator:
        """J X J^{-1} = C conj(X) C*."""
        C = self.linear_part
        signs = self._diagonal_signs()
        if signs is not None:
            s = [signs[:self.n], signs[self.n:]]
            blocks = []
            for i in range(2):
                row = []
                for j in range(2):
                    m = X[i, j]
                    if _is_exact(m):
                        row.append(m.conj().scale_rows(s[i]).scale_cols(s[j]))
                    else:
                        row.append(np.asarray(s[i])[:, None] * np.conj(m) * np.asarray(s[j])[None, :])
                blocks.append(row)
            return GradedOperator(self.n, blocks)
        if X.exact:
            M = C @ X.full().conj() @ C.H
        else:
            Cd = C.to_numpy()
            M = Cd @ np.conj(X.to_numpy()) @ Cd.conj().T
        return _split(self.n, M)


def build_J(n: int) -> AntiUnitary:
    """J(v+ + v-) = (-conj v+) + conj v-, which sends b_k to b_{-k}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    signs = {(i, i): (-1 if i < n else 1) for i in range(2 * n)}
    return AntiUnitary(n, ExactMatrix.from_sparse((2 * n, 2 * n), signs))


def j_gamma_relation(J: AntiUnitary) -> str:
    """'commute', 'anticommute' or 'neither', from J gamma J^{-1} against +-gamma."""
    gamma = build_dirac(J.n).gamma
    conj = J.conjugate(gamma)
    if conj.equals(gamma):
        return "commute"
    if conj.equals(gamma.scale(-1)):
        return "anticommute"
    return "neither"


def conjugate_element(a: SurfaceElement) -> SurfaceElement:
    """The element b with J pi(a) J^{-1} = pi(b): conjugated corner, hatted symbol.

    On the diagonal blocks the summand signs of C cancel, so only complex
    conjugation of entries survives; conj(T_f) = T_{f-hat}.
    """
    k = a.compact.entries
    k = k.conj() if _is_exact(k) else np.conj(k)
    return SurfaceElement(CornerMatrix(k), a.symbol.hat(), a.preset, f"J({a.label})J")


@dataclass(frozen=True, eq=False)
class ConjugationResult:
    operator: GradedOperator
    symbolic: SurfaceElement


def conjugate_by_J(a: SurfaceElement, n: int, J: AntiUnitary | None = None) -> ConjugationResult:
    J = J or build_J(n)
    return ConjugationResult(J.conjugate(represent(a, n)), conjugate_element(a))


# ---------------------------------------------------------------------------
# first-order condition


def _bracket(x: SurfaceElement, y: SurfaceElement) -> SurfaceElement:
    return multiply(x, y) - multiply(y, x)


@dataclass(frozen=True, eq=False)
class FirstOrderDefect:
    """[pi(a), J pi(b) J^{-1}] and [[D, pi(a)], J pi(b) J^{-1}].

    ``defect0``/``defect1`` are finite sections; ``corners`` holds the exact
    corner matrices (defect0, defect1 upper, defect1 lower) they compress.
    """

    defect0: GradedOperator
    defect1: GradedOperator
    corners: tuple
    support: int
    interior: int
    agrees: bool
    report: DecayReport


def support_bound(a: SurfaceElement, b: SurfaceElement) -> int:
    """Corner-size bound for both first-order defects: degrees plus corner sizes plus one."""
    return a.degree + b.degree + a.corner_size + b.corner_size + 1


def first_order_defect(a: SurfaceElement, b: SurfaceElement, n: int) -> FirstOrderDefect:
    """Both first-order defects, exactly as corners and as finite sections.

    The finite sections must reproduce the exact corners on the leading
    ``n - 2 (deg a + deg b + corners) - 2`` indices.
    """
    bt = conjugate_element(b)
    c0 = _bracket(a, bt)
    cu, cl = _symbolic_commutators(a)
    c1u, c1l = _bracket(cu, bt), _bracket(cl, bt)
    for c in (c0, c1u, c1l):
        if not c.symbol.is_zero(tol=1e-12 if not c.symbol.exact else 0.0):
            raise AssertionError("commutator of symbols must vanish")
    corners = tuple(c.compact for c in (c0, c1u, c1l))
    support = max(k.size for k in corners)

    # Entries are small Gaussian integers for exact inputs, so float products are exact here.
    A = truncate(a, n).to_numpy()
    B = truncate(bt, n).to_numpy()
    d0 = A @ B - B @ A
    up, lo = _commutators(A, n)
    d1u, d1l = up @ B - B @ up, lo @ B - B @ lo
    defect0 = GradedOperator.diag(d0, d0, "defect0")
    defect1 = GradedOperator.odd(d1u, d1l, "defect1")

    m = max(n - 2 * (a.degree + b.degree + a.corner_size + b.corner_size) - 2, 0)
    agrees = m > support and all(_same(trunc[:m, :m], k, m)
                                 for trunc, k in ((d0, corners[0]), (d1u, corners[1]), (d1l, corners[2])))
    verdict = "finite-support" if agrees else "slow"
    report = DecayReport(max_mode=support, verdict=verdict)
    return FirstOrderDefect(defect0, defect1, corners, support, m, agrees, report)


def _same(trunc, corner: CornerMatrix, m: int) -> bool:
    k = corner.padded(m)
    if _is_exact(trunc) and _is_exact(k):
        return trunc == k
    return bool(np.allclose(_dense(trunc), _dense(k), atol=1e-10, rtol=0))


# ---------------------------------------------------------------------------
# witnesses for the non-existence results


def commutant_dimension(generators, n: int, max_n: int = 32, tol: float = 1e-9) -> int:
    """Dimension of {A : [pi(g), A] = 0 for every generator} inside M_{2n}(C).

    The nullity of the stacked map vec(A) -> (I (x) G - G^T (x) I) vec(A) is read
    off the eigenvalues of its Gram matrix.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > max_n:
        raise ValueError(f"n={n} exceeds the memory budget max_n={max_n}")
    dim = 2 * n
    if not generators:
        return dim * dim
    Id = np.eye(dim)
    gram = np.zeros((dim * dim, dim * dim), dtype=complex)
    for g in generators:
        G = represent(g, n).to_numpy() if isinstance(g, SurfaceElement) else np.asarray(g, dtype=complex)
        GhG = G.conj().T @ G
        GGh = G @ G.conj().T
        # L = I(x)G - G^T(x)I  =>  L^H L expanded term by term
        gram += np.kron(Id, GhG) + np.kron(GGh.T, Id)
        gram -= np.kron(G.T, G.conj().T) + np.kron(G.conj(), G)
    if np.all(np.isreal(gram)):
        ev = np.linalg.eigvalsh(gram.real)
    else:
        ev = np.linalg.eigvalsh(gram)
    cutoff = tol * max(1.0, float(ev[-1]))
    return int(np.count_nonzero(ev <= cutoff))


def eigen_multiplicity_witness(n: int, tol: float = 1e-9, operator=None) -> bool:
    """True iff every nonzero eigenvalue of the truncated D (or ``operator``) is simple."""
    if n < 2:
        raise ValueError("n must be at least 2")
    H = build_dirac(n).D.to_numpy() if operator is None else np.asarray(operator, dtype=complex)
    ev = np.linalg.eigvalsh(H)
    clusters: list[list[float]] = []
    for x in ev:
        if clusters and x - clusters[-1][-1] <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return all(len(c) == 1 for c in clusters if abs(np.mean(c)) > tol)
