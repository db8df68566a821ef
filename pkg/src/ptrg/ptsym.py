"""
PT machinery: parity, signature and C operator, metric, eta-ansatz and the
Hermitian counterpart.

Parity is ``P = prod_i sigma^z_i`` (a diagonal +-1 matrix) so that ``P^2 = I``;
conjugation by it sends ``(S^x, S^y, S^z) -> (-S^x, -S^y, S^z)`` at every site.
Time reversal is entrywise complex conjugation in the computational basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .eig import PTTag, SpectralDecomposition, _clusters, classify_spectrum
from .errors import BrokenPTPhase, Inapplicable, SignatureNotUnimodular, VanishingNorm
from .model import AXES, CouplingSet, build_charge, _kron_sites, _local
from .qops import SpinSystem, spin_ops


def parity_op(sys: SpinSystem) -> np.ndarray:
    n = sys.hilbert_dim
    # sign = (-1)^(number of down spins) = (-1)^popcount(index)
    signs = np.array([(-1) ** bin(k).count("1") for k in range(n)], dtype=float)
    return np.diag(signs).astype(complex)


def _rel(x: np.ndarray, ref: np.ndarray) -> float:
    nr = np.linalg.norm(ref)
    return float(np.linalg.norm(x) / (nr if nr > 0 else 1.0))


def pt_residual(h: np.ndarray, p: np.ndarray) -> float:
    """``||P conj(H) P^-1 - H||_F / ||H||_F``."""
    return _rel(p @ np.conj(h) @ np.linalg.inv(p) - h, h)


def pseudo_hermiticity_residual(h: np.ndarray, p: np.ndarray) -> float:
    """``||H^dagger - P H P^-1||_F / ||H||_F``; zero for a P-pseudo-Hermitian ``H``."""
    return _rel(h.conj().T - p @ h @ np.linalg.inv(p), h)


@dataclass(frozen=True)
class PTOperators:
    """Parity, signature, C operator and metric built on one decomposition.

    ``included`` lists the eigenpairs that enter ``C``; ``signature[n]`` is 0
    for excluded pairs.  ``right``/``left`` are the gauge-fixed vectors, for
    which ``P right[:, n] = signature[n] * left[:, n]`` on real eigenvalues.
    """

    P: np.ndarray
    signature: np.ndarray
    C: np.ndarray
    rho: np.ndarray
    included: tuple
    broken: bool
    right: np.ndarray
    left: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def projector(self) -> np.ndarray:
        idx = list(self.included)
        return self.right[:, idx] @ self.left[:, idx].conj().T


def signature_and_c(decomp: SpectralDecomposition, p: np.ndarray, tol: float = 1e-6,
                    broken: str = "raise", real_tol: float = 1e-8, cluster_tol: float = 1e-8,
                    hamiltonian: np.ndarray | None = None) -> PTOperators:
    """Signature ``s_n`` and ``C = sum_n s_n |phi_n><psi_n|``.

    Within each cluster of equal real eigenvalues the right vectors are
    rotated and rescaled so that ``P |phi_n> = s_n |psi_n>``, which fixes
    ``s_n`` as the sign of the P-norm ``<phi_n|P|phi_n>``.

    Parameters
    ----------
    broken : {"raise", "restrict", "extend"}
        What to do when some eigenvalue is complex.  ``"raise"`` raises
        :class:`BrokenPTPhase`; ``"restrict"`` builds ``C`` on the real
        (PT-exact) sector only, so ``C^2`` is the sector projector;
        ``"extend"`` also includes complex eigenpairs with
        ``s_n = sign Re <psi_n|P|phi_n>`` and sets ``broken=True``.
    tol : float
        Largest accepted ``||P phi_n - s_n psi_n|| / ||psi_n||``.
    """
    if broken not in ("raise", "restrict", "extend"):
        raise ValueError("broken must be 'raise', 'restrict' or 'extend'")
    evals = decomp.eigenvalues
    cls = classify_spectrum(evals, real_tol)
    real_idx = cls.indices(PTTag.REAL)
    is_broken = len(real_idx) != evals.size
    if is_broken and broken == "raise":
        raise BrokenPTPhase(f"{evals.size - len(real_idx)} eigenvalues are complex")

    right = decomp.right.copy()
    left = decomp.left.copy()
    sig = np.zeros(evals.size)
    unimod = 0.0
    scale = max(1.0, float(np.max(np.abs(evals))))
    real_vals = evals[real_idx].real + 0j
    for group in _clusters(real_vals, cluster_tol * scale):
        idx = [real_idx[g] for g in group]
        phi = right[:, idx]
        gram = phi.conj().T @ p @ phi
        gram = 0.5 * (gram + gram.conj().T)
        d, w = np.linalg.eigh(gram)
        if np.min(np.abs(d)) < 1e-12 * max(1.0, np.max(np.abs(d))):
            raise SignatureNotUnimodular(
                f"P-norm vanishes in the eigenspace of E={evals[idx[0]].real:.6g}"
            )
        t = w / np.sqrt(np.abs(d))
        new_phi = phi @ t
        new_psi = left[:, idx] @ np.linalg.inv(t).conj().T
        s = np.sign(d)
        for col, n in enumerate(idx):
            right[:, n] = new_phi[:, col]
            left[:, n] = new_psi[:, col]
            sig[n] = s[col]
            diff = p @ new_phi[:, col] - s[col] * new_psi[:, col]
            unimod = max(unimod, float(np.linalg.norm(diff) / np.linalg.norm(new_psi[:, col])))
    if unimod > tol:
        raise SignatureNotUnimodular(
            f"P does not map right onto left eigenvectors (residual {unimod:.3e} > {tol:.1e})"
        )

    included = list(real_idx)
    if is_broken and broken == "extend":
        for n in range(evals.size):
            if n in real_idx:
                continue
            v = np.vdot(left[:, n], p @ right[:, n]).real
            sig[n] = 1.0 if v >= 0 else -1.0
            included.append(n)
        included.sort()

    c = (right[:, included] * sig[included]) @ left[:, included].conj().T
    rho = p @ c
    h = decomp.reconstruct() if hamiltonian is None else np.asarray(hamiltonian)
    proj = right[:, included] @ left[:, included].conj().T
    nh = np.linalg.norm(h)
    nh = nh if nh > 0 else 1.0
    diagnostics = {
        "unimodularity": unimod,
        "c_squared": float(np.linalg.norm(c @ c - proj)),
        "c_h_commutator": float(np.linalg.norm(c @ h - h @ c) / nh),
        "c_pt_commutator": float(np.linalg.norm(c @ p - p @ np.conj(c))),
        "intertwining": float(np.linalg.norm(h.conj().T @ rho - rho @ h) / nh),
        "sector_size": len(included),
    }
    return PTOperators(p, sig, c, rho, tuple(included), is_broken and broken == "extend",
                       right, left, diagnostics)


@dataclass(frozen=True)
class MetricReport:
    rho: np.ndarray
    hermiticity: float
    min_eigenvalue: float
    positive: bool
    intertwining: float | None


def metric_rho(p: np.ndarray, c: np.ndarray, hamiltonian: np.ndarray | None = None,
               psd_tol: float = 1e-10) -> MetricReport:
    """``rho = P C`` with its Hermiticity, positivity and (optionally) intertwining residual."""
    rho = p @ c
    herm = float(np.linalg.norm(rho - rho.conj().T))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    inter = None
    if hamiltonian is not None:
        inter = _rel(hamiltonian.conj().T @ rho - rho @ hamiltonian, hamiltonian)
    return MetricReport(rho, herm, min_eig, min_eig > -psd_tol, inter)


# --- eta-ansatz -------------------------------------------------------------


@dataclass(frozen=True)
class EtaAnsatz:
    q: np.ndarray
    eta: np.ndarray
    rho: np.ndarray
    consistency_residual: float
    bch_residual: float

    @property
    def eta_inv(self) -> np.ndarray:
        return np.diag(1.0 / np.diag(self.eta))


def _sz_total_weighted(sys: SpinSystem, q) -> np.ndarray:
    diag = np.zeros(sys.hilbert_dim)
    for i, qi in enumerate(q):
        diag += qi * np.real(np.diag(spin_ops(sys, i).z))
    return diag


def eta_from_q(sys: SpinSystem, q) -> EtaAnsatz:
    """``eta = exp(-1/2 sum_i q_i S_i^z)`` and ``rho = exp(-sum_i q_i S_i^z)``.

    ``bch_residual`` is the largest deviation of ``eta S_i^+- eta^-1`` from
    ``exp(-+q_i/2) S_i^+-`` over all sites.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != sys.site_count:
        raise ValueError(f"need {sys.site_count} q values, got {q.size}")
    w = _sz_total_weighted(sys, q)
    eta = np.diag(np.exp(-0.5 * w)).astype(complex)
    rho = np.diag(np.exp(-w)).astype(complex)
    eta_inv = np.diag(np.exp(0.5 * w)).astype(complex)
    consistency = float(np.max(np.abs(rho - eta.conj().T @ eta)))
    bch = 0.0
    for i in range(sys.site_count):
        ops = spin_ops(sys, i)
        bch = max(bch,
                  float(np.max(np.abs(eta @ ops.plus @ eta_inv - np.exp(-q[i] / 2) * ops.plus))),
                  float(np.max(np.abs(eta @ ops.minus @ eta_inv - np.exp(q[i] / 2) * ops.minus))))
    return EtaAnsatz(q, eta, rho, consistency, bch)


def _transverse_gamma(cs: CouplingSet, imag_tol: float) -> np.ndarray:
    gx = cs.GammaX
    if np.max(np.abs(gx.real), initial=0.0) > imag_tol:
        raise ValueError("solve_q_xxz expects purely imaginary GammaX = i*gamma")
    return gx.imag


def solve_q_xxz(cs: CouplingSet, tol: float = 1e-10, bound: float = 50.0):
    """Real ``q`` minimizing ``sum_{i!=j} |Im(Gamma^x_ij e^{q_i - q_j})|^2``.

    Returns ``(q, residual)`` where ``residual`` is the square root of the
    minimum.  For ``Gamma^x = i gamma`` the imaginary part is
    ``gamma_ij e^{q_i - q_j}``, which vanishes only where ``gamma_ij = 0``,
    so any nonzero coupling leaves a finite residual.

    Raises
    ------
    Inapplicable
        When the minimal residual exceeds ``tol``; carries ``residual`` and
        the minimizing ``q``.
    """
    gamma = _transverse_gamma(cs, imag_tol=1e-12)
    n = cs.n
    w = gamma**2
    np.fill_diagonal(w, 0.0)
    if not np.any(w):
        return np.zeros(n), 0.0

    def objective(free):
        q = np.concatenate([[0.0], free])
        diff = q[:, None] - q[None, :]
        terms = w * np.exp(2 * diff)
        grad = 2 * (terms.sum(axis=1) - terms.sum(axis=0))
        return terms.sum(), grad[1:]

    res = minimize(objective, np.zeros(n - 1), jac=True, method="L-BFGS-B",
                   bounds=[(-bound, bound)] * (n - 1), options={"ftol": 1e-15, "gtol": 1e-12})
    q = np.concatenate([[0.0], res.x])
    q -= q.mean()
    residual = float(np.sqrt(max(objective(q[1:] - q[0])[0], 0.0)))
    if residual > tol:
        raise Inapplicable(residual, q)
    return q, residual


def q_from_fields(cs: CouplingSet) -> np.ndarray:
    """``q_i = -ln |b_i^x|`` with ``B_i^x = i b_i^x`` (the field-based rule)."""
    b = np.abs(cs.Bx.imag)
    if np.any(b == 0):
        raise ValueError("field rule needs nonzero imaginary B^x on every site")
    return -np.log(b)


def hermitian_counterpart(h: np.ndarray, eta: np.ndarray, inverse: bool = False):
    """``eta H eta^-1`` (or ``eta^-1 H eta`` with ``inverse=True``) and its Hermiticity residual."""
    eta_inv = np.linalg.inv(eta)
    out = eta_inv @ h @ eta if inverse else eta @ h @ eta_inv
    return out, _rel(out - out.conj().T, out)


def counterpart_closed_form(sys: SpinSystem, cs: CouplingSet, q, i: int) -> np.ndarray:
    """Closed-form expression for ``eta^-1 Q_i eta`` that scales ``S^x, S^y`` by ``e^{q}``.

    This is the term-by-term rescaling ``B^a_i -> e^{q_i} B^a_i`` and
    ``Gamma^a_ik -> e^{q_i+q_k} Gamma^a_ik`` for ``a`` in ``x, y``; it is
    exposed for comparison with the exact similarity transform, from which it
    differs in general.
    """
    q = np.asarray(q, dtype=float)
    n = cs.n
    out = np.zeros((sys.hilbert_dim,) * 2, dtype=complex)
    for a in AXES:
        loc = _local(a, "spin")
        fac_i = np.exp(q[i]) if a != "z" else 1.0
        out += fac_i * cs.field(a)[i] * _kron_sites(n, {i: loc})
        for k in range(n):
            if k == i:
                continue
            fac = np.exp(q[i] + q[k]) if a != "z" else 1.0
            out += fac * cs.gamma(a)[i, k] * _kron_sites(n, {i: loc, k: loc})
    return out


def counterpart_discrepancy(sys: SpinSystem, cs: CouplingSet, q, i: int) -> dict:
    """Compare exact ``eta^-1 Q_i eta`` against :func:`counterpart_closed_form`."""
    eta = eta_from_q(sys, q)
    qi = build_charge(sys, cs, i)
    exact, herm = hermitian_counterpart(qi, eta.eta, inverse=True)
    closed = counterpart_closed_form(sys, cs, q, i)
    return {
        "discrepancy": _rel(exact - closed, exact),
        "exact_hermiticity": herm,
        "closed_form_hermiticity": _rel(closed - closed.conj().T, closed),
    }


# --- inner products ----------------------------------------------------------


def inner_rho(phi: np.ndarray, psi: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.vdot(phi, rho @ psi))


def expectation_cp(a: np.ndarray, psi: np.ndarray, c: np.ndarray, p: np.ndarray,
                   norm_tol: float = 1e-12) -> complex:
    """``<psi|C P A|psi> / <psi|C P|psi>``."""
    cp = c @ p
    den = np.vdot(psi, cp @ psi)
    if abs(den) < norm_tol:
        raise VanishingNorm(f"<psi|CP|psi> = {den:.3e}")
    return complex(np.vdot(psi, cp @ (a @ psi)) / den)
