"""
Perturbation theory in the transverse fields.

The full operator ``H = H0 + V`` has

* ``H0 = sum_i B^z_i S^z_i + sum_{i!=j} (Gamma^x_ij (S^+_i S^-_j + S^-_i S^+_j) + Gamma^z_ij S^z_i S^z_j)``
* ``V  = sum_i (B^x_i S^x_i + B^y_i S^y_i)``

Energies are expanded to second order around the eigenpairs of ``H0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eig import SpectralDecomposition, _clusters, eig_general
from .errors import DefectiveH0, NearDefective, TrackingLost, ZeroLongitudinalField
from .model import CouplingSet, _flip_flop, _kron_sites
from .ptsym import parity_op, signature_and_c
from .qops import SpinSystem, pauli


@dataclass(frozen=True)
class PerturbationSplit:
    """``H0``, ``V`` and the smallness ratio ``r = max(|B^x|, |B^y|) / min |B^z|``."""

    H0: np.ndarray
    V: np.ndarray
    ratio: float
    couplings: CouplingSet | None = None

    @property
    def H(self) -> np.ndarray:
        return self.H0 + self.V

    def scaled(self, s: float) -> np.ndarray:
        return self.H0 + s * self.V

    @classmethod
    def from_operators(cls, h0, v) -> "PerturbationSplit":
        h0 = np.asarray(h0, dtype=complex)
        v = np.asarray(v, dtype=complex)
        if h0.shape != v.shape:
            raise ValueError("H0 and V must have the same shape")
        return cls(h0, v, float("nan"))


def split_hamiltonian(cs: CouplingSet) -> PerturbationSplit:
    if np.any(np.abs(cs.Bz) == 0):
        raise ZeroLongitudinalField("B^z must be nonzero at every site")
    n = cs.n
    sys = SpinSystem(n)
    half = {a: pauli(a) / 2 for a in "xyz"}
    h0 = np.zeros((sys.hilbert_dim,) * 2, dtype=complex)
    v = np.zeros_like(h0)
    for i in range(n):
        h0 += cs.Bz[i] * _kron_sites(n, {i: half["z"]})
        v += cs.Bx[i] * _kron_sites(n, {i: half["x"]}) + cs.By[i] * _kron_sites(n, {i: half["y"]})
    for i, j in itertools.permutations(range(n), 2):
        if cs.GammaX[i, j] != 0:
            h0 += cs.GammaX[i, j] * _flip_flop(n, i, j)
        if cs.GammaZ[i, j] != 0:
            h0 += cs.GammaZ[i, j] * _kron_sites(n, {i: half["z"], j: half["z"]})
    ratio = float(max(np.max(np.abs(cs.Bx)), np.max(np.abs(cs.By))) / np.min(np.abs(cs.Bz)))
    return PerturbationSplit(h0, v, ratio, cs)


@dataclass(frozen=True)
class CorrectionTable:
    """Per-level corrections, levels sorted by ``Re E0``.

    ``coefficients[m, n]`` is the first-order admixture ``V_mn / (E0_n - E0_m)``
    of level ``m`` into level ``n`` (zero inside a degenerate cluster).
    ``E2`` uses the bilinear numerator ``V_nm V_mn``; ``E2_modulus`` uses
    ``|V_mn|^2`` and coincides with it when ``V`` is Hermitian in the chosen
    inner product.
    """

    E0: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    E2_modulus: np.ndarray
    coefficients: np.ndarray
    matrix_elements: np.ndarray
    clusters: tuple
    degenerate: np.ndarray
    unresolved: np.ndarray
    inner: str
    notes: tuple = field(default_factory=tuple)

    @property
    def valid(self) -> np.ndarray:
        return ~self.unresolved

    @property
    def second_order(self) -> np.ndarray:
        return self.E0 + self.E1 + self.E2


def _matrix_elements(decomp: SpectralDecomposition, v: np.ndarray, inner: str,
                     p: np.ndarray | None):
    """Return ``(right, left, V_mn)`` in the chosen inner product."""
    right = decomp.right
    if inner == "standard":
        left = right / np.sum(np.abs(right) ** 2, axis=0)
        return right, left, left.conj().T @ v @ right
    if inner != "cpt":
        raise ValueError("inner must be 'cpt' or 'standard'")
    pt = signature_and_c(decomp, p, broken="extend")
    cp = pt.C @ pt.P
    return pt.right, pt.left, pt.left.conj().T @ cp @ v @ pt.right


def corrections(split: PerturbationSplit, inner: str = "cpt", degeneracy_tol: float = 1e-9,
                lift_tol: float = 1e-9) -> CorrectionTable:
    """First- and second-order energy corrections for every level of ``H0``.

    Degenerate clusters (``|E0_n - E0_m| < degeneracy_tol``) are handled by
    diagonalizing ``V`` inside the cluster first.  A cluster whose first-order
    eigenvalues stay within ``lift_tol`` of each other is marked in
    ``unresolved``; its corrections are still tabulated but not trustworthy.
    """
    h0 = split.H0
    try:
        decomp = eig_general(h0)
    except NearDefective as exc:
        raise DefectiveH0(str(exc)) from exc
    p = parity_op(SpinSystem(int(round(np.log2(h0.shape[0]))))) if inner == "cpt" else None
    right, left, vmn = _matrix_elements(decomp, split.V, inner, p)
    e0 = decomp.eigenvalues.copy()
    dim = e0.size

    scale = max(1.0, float(np.max(np.abs(e0))))
    groups = _clusters(e0, degeneracy_tol * scale)
    degenerate = np.zeros(dim, dtype=bool)
    unresolved = np.zeros(dim, dtype=bool)
    notes = []
    for group in groups:
        if len(group) < 2:
            continue
        degenerate[group] = True
        block = vmn[np.ix_(group, group)]
        w, r = np.linalg.eig(block)
        try:
            rinv = np.linalg.inv(r)
        except np.linalg.LinAlgError:
            rinv = None
        spread = min(abs(a - b) for a, b in itertools.combinations(w, 2))
        if spread < lift_tol or rinv is None:
            unresolved[group] = True
            notes.append(f"V does not lift the cluster at E0={e0[group[0]]:.6g} (levels {group})")
            continue
        # rotate right by r and left by r^{-dagger}; V_mn transforms by similarity
        right[:, group] = right[:, group] @ r
        left[:, group] = left[:, group] @ rinv.conj().T
        vmn[group, :] = rinv @ vmn[group, :]
        vmn[:, group] = vmn[:, group] @ r

    same = np.zeros((dim, dim), dtype=bool)
    for group in groups:
        same[np.ix_(group, group)] = True
    diff = e0[None, :] - e0[:, None]  # diff[m, n] = E_n - E_m
    safe = np.where(same, 1.0, diff)
    coeff = np.where(same, 0.0, vmn / safe)
    e1 = np.diag(vmn).copy()
    e2 = np.where(same, 0.0, vmn.T * vmn / safe).sum(axis=0)
    e2_mod = np.where(same, 0.0, np.abs(vmn) ** 2 / safe).sum(axis=0)
    return CorrectionTable(e0, e1, e2, e2_mod, coeff, vmn, tuple(tuple(g) for g in groups),
                           degenerate, unresolved, inner, tuple(notes))


def closed_form_element_sq(cs: CouplingSet, m: int, n: int) -> float:
    """``1/4 (|B^x_i|^2 + |B^y_i|^2)`` when basis states ``m, n`` differ at one site ``i``, else 0.

    Valid at ``g = 0`` where the unperturbed eigenstates are computational
    basis states, and when ``B^x`` and ``B^y`` at that site are in phase
    quadrature (for example both purely imaginary).
    """
    x = m ^ n
    if x == 0 or x & (x - 1):
        return 0.0
    i = cs.n - x.bit_length()
    return 0.25 * float(abs(cs.Bx[i]) ** 2 + abs(cs.By[i]) ** 2)


@dataclass(frozen=True)
class ScalingResult:
    scales: np.ndarray
    levels: np.ndarray
    errors: np.ndarray
    slopes: np.ndarray

    @property
    def min_slope(self) -> float:
        ok = self.slopes[np.isfinite(self.slopes)]
        return float(ok.min()) if ok.size else float("nan")


def scaling_validation(split: PerturbationSplit, scales, levels=None, inner: str = "cpt",
                       floor: float = 1e-13, gap_fraction: float = 0.5) -> ScalingResult:
    """Log-log slope of ``|E_exact(s) - (E0 + s E1 + s^2 E2)|`` against ``s``.

    Exact eigenvalues of ``H0 + sV`` are matched to the perturbative
    predictions by minimum-cost assignment at each ``s``.  A level whose
    matched eigenvalue lies further than ``gap_fraction`` times the gap to
    the nearest other prediction raises :class:`TrackingLost`.  Levels whose
    error never exceeds ``floor`` get a NaN slope (exact to rounding).
    Degenerate levels are skipped unless listed explicitly.
    """
    s_all = np.asarray(scales, dtype=float)
    if np.any(s_all < 0):
        raise ValueError("scales must be non-negative")
    s = np.unique(s_all[s_all > 0])
    if s.size < 2 or s[-1] / s[0] < 10:
        raise ValueError("positive scales must span at least one decade")
    table = corrections(split, inner=inner)
    if levels is None:
        levels = np.flatnonzero(~table.degenerate)
    levels = np.asarray(levels, dtype=int)

    errors = np.empty((s.size, levels.size))
    for k, sk in enumerate(s):
        pred = table.E0 + sk * table.E1 + sk**2 * table.E2
        exact = np.linalg.eigvals(split.scaled(sk))
        cost = np.abs(pred[:, None] - exact[None, :])
        rows, cols = linear_sum_assignment(cost)
        match = np.empty(pred.size, dtype=complex)
        match[rows] = exact[cols]
        for col, n in enumerate(levels):
            others = np.delete(pred, n)
            gap = np.min(np.abs(others - pred[n])) if others.size else np.inf
            err = abs(match[n] - pred[n])
            if err > gap_fraction * gap:
                raise TrackingLost(f"level {n} cannot be tracked at s={sk:.3g}")
            errors[k, col] = err
    slopes = np.full(levels.size, np.nan)
    logs = np.log(s)
    for col in range(levels.size):
        e = errors[:, col]
        if np.all(e > floor):
            slopes[col] = np.polyfit(logs, np.log(e), 1)[0]
    return ScalingResult(s, levels, errors, slopes)
