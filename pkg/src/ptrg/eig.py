"""
Non-Hermitian eigendecomposition with biorthonormal left/right vectors.

Right vectors come from LAPACK (``scipy.linalg.eig``).  Left vectors are the
right eigenvectors of ``A^dagger`` matched to ``E_n`` by conjugate eigenvalue;
clusters of (numerically) equal eigenvalues are re-biorthonormalized with a
small linear solve.  When matching is ambiguous the inverse of the right
eigenvector matrix is used instead, provided it is reasonably conditioned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from .errors import NearDefective


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with columns ``right[:, n]`` (|phi_n>) and ``left[:, n]`` (|psi_n>).

    The pairs satisfy ``left[:, n].conj() @ right[:, m] == delta_nm`` up to
    ``biorth_residual``.  Right vectors have unit 2-norm; left vectors carry
    the scale that makes ``<psi_n|phi_n> = 1``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    biorth_residual: float
    condition: np.ndarray
    near_defective: np.ndarray
    adjoint_mismatch: float
    method: str

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def projector(self, n: int) -> np.ndarray:
        return np.outer(self.right[:, n], self.left[:, n].conj())

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ self.left.conj().T

    def resolution_of_identity(self) -> np.ndarray:
        return self.right @ self.left.conj().T

    def reconstruction_error(self, a: np.ndarray) -> float:
        na = np.linalg.norm(a)
        return float(np.linalg.norm(a - self.reconstruct()) / (na if na > 0 else 1.0))

    def backward_error(self, a: np.ndarray) -> float:
        na = np.linalg.norm(a)
        r = a @ self.right - self.right * self.eigenvalues
        return float(np.linalg.norm(r) / (na if na > 0 else 1.0))


def _clusters(points: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage groups of complex numbers closer than ``radius``."""
    n = points.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n > 1 and radius > 0:
        tree = cKDTree(np.column_stack([points.real, points.imag]))
        for i, j in sorted(tree.query_pairs(radius)):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def _left_from_adjoint(a, evals, right, radius, cond_limit):
    """Left vectors via ``eig(A^dagger)``; ``None`` when the matching is ambiguous."""
    f, w = scipy.linalg.eig(a.conj().T)
    target = np.conj(f)
    tree = cKDTree(np.column_stack([target.real, target.imag]))
    left = np.empty_like(right)
    used = np.zeros(f.size, dtype=bool)
    mismatch = 0.0
    for group in _clusters(evals, radius):
        cand = set()
        for i in group:
            cand.update(tree.query_ball_point([evals[i].real, evals[i].imag], radius))
        cand = sorted(cand)
        if len(cand) != len(group) or used[cand].any():
            return None, np.inf
        used[cand] = True
        mismatch = max(mismatch, max(min(abs(target[j] - evals[i]) for j in cand) for i in group))
        phi = right[:, group]
        psi = w[:, cand]
        m = psi.conj().T @ phi
        # a deficient eigenspace shows up as (nearly) parallel right vectors
        if np.linalg.cond(phi) > cond_limit or np.linalg.cond(m) > cond_limit:
            return None, np.inf
        left[:, group] = psi @ np.linalg.inv(m).conj().T
    return left, mismatch


def eig_general(a: np.ndarray, tol: float = 1e-9, cond_limit: float = 1e8,
                biorth_limit: float = 1e-6) -> SpectralDecomposition:
    """Biorthonormal eigendecomposition of a general complex square matrix.

    Parameters
    ----------
    a : (n, n) array_like
    tol : float
        Relative radius (times ``max(1, max|E|)``) within which eigenvalues are
        treated as one cluster and within which ``conj(eig(A^dagger))`` must
        reproduce ``eig(A)``.
    cond_limit : float
        Largest acceptable condition number for the per-cluster overlap matrix
        and for the inverse fallback.
    biorth_limit : float
        ``max|<psi_n|phi_m> - delta_nm|`` above which the decomposition is
        rejected as near-defective.

    Raises
    ------
    NearDefective
        If no biorthonormal pairing can be built within the limits above.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")

    evals, right = scipy.linalg.eig(a)
    order = np.lexsort((evals.imag, evals.real))
    evals, right = evals[order], right[:, order]
    right = right / np.linalg.norm(right, axis=0)

    radius = tol * max(1.0, float(np.max(np.abs(evals))) if evals.size else 1.0)
    left, mismatch = _left_from_adjoint(a, evals, right, radius, cond_limit)
    method = "adjoint"
    if left is None:
        c = np.linalg.cond(right)
        if not np.isfinite(c) or c >= cond_limit:
            raise NearDefective(
                f"eigenvector matrix condition {c:.3e} >= {cond_limit:.1e} and "
                "adjoint matching is ambiguous"
            )
        left = np.linalg.inv(right).conj().T
        method = "inverse"
        # eigenvalues of A^dagger still checked against conj(E)
        f = scipy.linalg.eigvals(a.conj().T)
        tree = cKDTree(np.column_stack([np.conj(f).real, np.conj(f).imag]))
        mismatch = float(np.max(tree.query(np.column_stack([evals.real, evals.imag]))[0]))

    overlap = left.conj().T @ right
    resid = float(np.max(np.abs(overlap - np.eye(evals.size)))) if evals.size else 0.0
    if resid > biorth_limit:
        raise NearDefective(f"biorthonormality residual {resid:.3e} exceeds {biorth_limit:.1e}")
    condition = np.linalg.norm(left, axis=0)
    return SpectralDecomposition(
        eigenvalues=evals,
        right=right,
        left=left,
        biorth_residual=resid,
        condition=condition,
        near_defective=condition > cond_limit,
        adjoint_mismatch=float(mismatch),
        method=method,
    )


class PTTag(str, enum.Enum):
    REAL = "Real"
    PAIR = "ConjugatePair"
    UNPAIRED = "UnpairedComplex"


@dataclass(frozen=True)
class PTClassification:
    tags: tuple[PTTag, ...]
    partners: tuple[int, ...]
    tol: float

    def count(self, tag: PTTag) -> int:
        return sum(t is tag for t in self.tags)

    @property
    def all_real(self) -> bool:
        return all(t is PTTag.REAL for t in self.tags)

    @property
    def dichotomous(self) -> bool:
        """True when every eigenvalue is real or has a conjugate partner."""
        return self.count(PTTag.UNPAIRED) == 0

    def indices(self, tag: PTTag) -> list[int]:
        return [i for i, t in enumerate(self.tags) if t is tag]


def classify_spectrum(eigenvalues, tol: float = 1e-8) -> PTClassification:
    """Tag each eigenvalue Real, ConjugatePair (with partner) or UnpairedComplex.

    ``E`` is real when ``|Im E| <= tol * max(1, |E|)``.  Complex values are
    paired greedily, in ascending (Re, Im) order, with the nearest unpaired
    complex value ``F`` satisfying ``|E - conj(F)| <= tol * max(1, |E|)``.
    The fixed processing order makes the tag multiset independent of the
    input order.
    """
    ev = np.asarray(eigenvalues, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(ev)):
        raise ValueError("eigenvalues must be finite")
    n = ev.size
    tags: list[PTTag | None] = [None] * n
    partners = [-1] * n
    scale = np.maximum(1.0, np.abs(ev))
    real = np.abs(ev.imag) <= tol * scale
    for i in np.flatnonzero(real):
        tags[i] = PTTag.REAL
    order = np.lexsort((ev.imag, ev.real))
    for i in order:
        if tags[i] is not None:
            continue
        best, best_d = -1, np.inf
        for j in order:
            if j == i or tags[j] is not None:
                continue
            d = abs(ev[i] - np.conj(ev[j]))
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d <= tol * scale[i]:
            tags[i] = tags[best] = PTTag.PAIR
            partners[i], partners[best] = int(best), int(i)
        else:
            tags[i] = PTTag.UNPAIRED
    return PTClassification(tuple(tags), tuple(partners), tol)
