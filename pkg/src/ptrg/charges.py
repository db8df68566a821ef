"""Conserved-charge suite: mutual commutation, quadratic relations, transfer matrix."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AllDenominatorsVanish, PoleAtEpsilon
from .model import AXES, CouplingSet, build_charge
from .qops import SpinSystem, spin_ops

KAPPA_CANDIDATES = (1.0, 0.25, 0.5)


@dataclass(frozen=True)
class ChargeSet:
    charges: tuple
    couplings: CouplingSet
    convention: str = "spin"

    def __post_init__(self):
        n = self.couplings.n
        if len(self.charges) != n:
            raise ValueError(f"expected {n} charges, got {len(self.charges)}")
        dim = 2**n
        for q in self.charges:
            if q.shape != (dim, dim):
                raise ValueError("charge dimension does not match the coupling set")

    def __len__(self):
        return len(self.charges)

    def __getitem__(self, i):
        return self.charges[i]


def make_charge_set(sys: SpinSystem, cs: CouplingSet, convention: str = "spin",
                    threads: int = 1) -> ChargeSet:
    """Build every ``Q_i``; ``threads > 1`` builds them concurrently (same result)."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            qs = list(pool.map(lambda i: build_charge(sys, cs, i, convention), range(cs.n)))
    else:
        qs = [build_charge(sys, cs, i, convention) for i in range(cs.n)]
    return ChargeSet(tuple(qs), cs, convention)


@dataclass(frozen=True)
class CommutationReport:
    max_pair: float
    pairs: np.ndarray
    max_with_hamiltonian: float | None = None


def commutation_report(cset: ChargeSet, hamiltonian: np.ndarray | None = None) -> CommutationReport:
    """Largest ``||[Q_i, Q_j]|| / (||Q_i|| ||Q_j||)`` over pairs, optionally also against ``H``."""
    norms = [np.linalg.norm(q) for q in cset.charges]
    if min(norms) == 0:
        raise ValueError("commutation report needs nonzero charges")
    n = len(cset)
    pairs = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        qi, qj = cset[i], cset[j]
        r = np.linalg.norm(qi @ qj - qj @ qi) / (norms[i] * norms[j])
        pairs[i, j] = pairs[j, i] = r
    with_h = None
    if hamiltonian is not None:
        nh = np.linalg.norm(hamiltonian)
        with_h = 0.0 if nh == 0 else max(
            float(np.linalg.norm(q @ hamiltonian - hamiltonian @ q) / (nq * nh))
            for q, nq in zip(cset.charges, norms)
        )
    return CommutationReport(float(pairs.max()) if n > 1 else 0.0, pairs, with_h)


@dataclass(frozen=True)
class QuadraticRelation:
    """Coefficients of ``Q_i^2 = sum_{j!=i} C_ij Q_j + kappa K_i``.

    ``C`` holds the selected branch.  ``linear`` maps an axis to the
    linear-terms matrix ``2 B_i^a Gamma^a_ik / B_k^a`` (NaN where unusable),
    ``quadratic`` maps an axis to ``-2 Gamma^b_ik Gamma^c_ik / Gamma^a_ki``.
    """

    C: np.ndarray
    K: np.ndarray
    linear: dict
    quadratic: dict
    branch_agreement: float
    kappa: float | None = None


def quadratic_coeffs(cs: CouplingSet, zero_tol: float = 1e-14) -> QuadraticRelation:
    n = cs.n
    K = np.array([
        sum(cs.field(a)[i] ** 2 for a in AXES)
        + sum(cs.gamma(a)[i, k] ** 2 for a in AXES for k in range(n) if k != i)
        for i in range(n)
    ], dtype=complex)

    linear, quadratic = {}, {}
    for a in AXES:
        b_field, gam = cs.field(a), cs.gamma(a)
        lin = np.full((n, n), np.nan, dtype=complex)
        for i, k in itertools.permutations(range(n), 2):
            if abs(b_field[k]) > zero_tol:
                lin[i, k] = 2 * b_field[i] * gam[i, k] / b_field[k]
        linear[a] = lin
        b, c = (x for x in AXES if x != a)
        gb, gc = cs.gamma(b), cs.gamma(c)
        quad = np.full((n, n), np.nan, dtype=complex)
        for i, k in itertools.permutations(range(n), 2):
            if abs(gam[k, i]) > zero_tol:
                quad[i, k] = -2 * gb[i, k] * gc[i, k] / gam[k, i]
        quadratic[a] = quad

    C = np.zeros((n, n), dtype=complex)
    agreement = 0.0
    for i, k in itertools.permutations(range(n), 2):
        # linear branch with the largest |B_k^a| (mildest denominator) is primary
        lin_axes = [a for a in AXES if not np.isnan(linear[a][i, k])]
        quad_axes = [a for a in AXES if not np.isnan(quadratic[a][i, k])]
        if lin_axes:
            best = max(lin_axes, key=lambda a: abs(cs.field(a)[k]))
            C[i, k] = linear[best][i, k]
        elif quad_axes:
            best = max(quad_axes, key=lambda a: abs(cs.gamma(a)[k, i]))
            C[i, k] = quadratic[best][i, k]
        else:
            raise AllDenominatorsVanish(f"no usable branch for C[{i},{k}]")
        values = [linear[a][i, k] for a in lin_axes] + [quadratic[a][i, k] for a in quad_axes]
        agreement = max(agreement, max(abs(v - C[i, k]) for v in values))
    return QuadraticRelation(C, K, linear, quadratic, float(agreement))


@dataclass(frozen=True)
class QuadraticResidual:
    kappa: float
    per_charge: np.ndarray
    by_kappa: dict

    @property
    def max_residual(self) -> float:
        return float(self.per_charge.max())


def _residuals(cset: ChargeSet, qr: QuadraticRelation, kappa: float) -> np.ndarray:
    n = len(cset)
    eye = np.eye(cset[0].shape[0])
    out = np.empty(n)
    for i in range(n):
        lhs = cset[i] @ cset[i]
        rhs = sum(qr.C[i, j] * cset[j] for j in range(n) if j != i) + kappa * qr.K[i] * eye
        out[i] = np.linalg.norm(lhs - rhs)
    return out


def quadratic_residual(cset: ChargeSet, qr: QuadraticRelation, kappa: float | None = None,
                       candidates=KAPPA_CANDIDATES) -> QuadraticResidual:
    """Per-charge ``||Q_i^2 - sum_j C_ij Q_j - kappa K_i I||_F``.

    With ``kappa=None`` the constant's normalization is calibrated by taking
    the candidate with the smallest summed residual (first wins on ties).
    """
    if kappa is not None:
        r = _residuals(cset, qr, kappa)
        return QuadraticResidual(float(kappa), r, {float(kappa): r})
    table = {float(k): _residuals(cset, qr, k) for k in candidates}
    best = min(table, key=lambda k: table[k].sum())
    return QuadraticResidual(best, table[best], table)


def transfer_matrix(sys: SpinSystem, cs: CouplingSet, u: complex, pole_tol: float = 1e-12) -> np.ndarray:
    """``T(u) = sum_i S_i^z / (u - eps_i)``, a diagonal operator."""
    if sys.site_count != cs.n:
        raise ValueError("system size does not match couplings")
    t = np.zeros((sys.hilbert_dim,) * 2, dtype=complex)
    for i, e in enumerate(cs.epsilon):
        if abs(u - e) < pole_tol:
            raise PoleAtEpsilon(f"u={u} coincides with eps_{i}={e}")
        t += spin_ops(sys, i).z / (u - e)
    return t
