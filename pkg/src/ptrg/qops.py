"""
Operator kernel for chains of spin-1/2 sites.

Every operator is a dense complex ``numpy.ndarray`` of shape ``(2**N, 2**N)``.

Conventions
-----------
* Site 0 is the most significant bit of the computational-basis index, so
  ``site_operator(sys, i, A)`` is ``I x ... x A x ... x I`` with ``A`` in
  Kronecker slot ``i`` counted from the left.
* Basis label ``|0>`` is spin up (``S^z = +1/2``) and ``|1>`` is spin down.
  The lowering operator therefore maps ``|0> -> |1>``. The source model never
  states which qubit label is the excited state; this choice is the one under
  which the all-``|0>`` initial state decays under ``sigma^-`` jumps, and it is
  an interpretation rather than a given.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_SITES = 12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class SpinSystem:
    """A lattice of ``site_count`` spin-1/2 sites (dense cap: 12 sites)."""

    site_count: int

    def __post_init__(self):
        n = self.site_count
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise TypeError("site_count must be an integer")
        if not 1 <= n <= MAX_SITES:
            raise ValueError(f"site_count must be in [1, {MAX_SITES}], got {n}")

    @property
    def hilbert_dim(self) -> int:
        return 2**self.site_count

    def basis_index(self, bits: str) -> int:
        """Index of a basis state given as a bitstring such as ``"0000"``."""
        if len(bits) != self.site_count or set(bits) - {"0", "1"}:
            raise ValueError(f"bitstring must have {self.site_count} characters from '01'")
        return int(bits, 2)

    def basis_state(self, bits: str) -> np.ndarray:
        psi = np.zeros(self.hilbert_dim, dtype=complex)
        psi[self.basis_index(bits)] = 1.0
        return psi


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None


def _check_site(sys: SpinSystem, i: int) -> None:
    if not 0 <= i < sys.site_count:
        raise IndexError(f"site {i} out of range for {sys.site_count} sites")


def site_operator(sys: SpinSystem, i: int, local: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator at site ``i`` of ``sys``."""
    _check_site(sys, i)
    local = np.asarray(local, dtype=complex)
    if local.shape != (2, 2):
        raise ValueError(f"local operator must be 2x2, got {local.shape}")
    eye = np.eye(2, dtype=complex)
    factors = [local if k == i else eye for k in range(sys.site_count)]
    return reduce(np.kron, factors)


@dataclass(frozen=True)
class SiteSpin:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    def __iter__(self):
        return iter((self.x, self.y, self.z, self.plus, self.minus))

    def axis(self, a: str) -> np.ndarray:
        return {"x": self.x, "y": self.y, "z": self.z}[a]


def spin_ops(sys: SpinSystem, i: int) -> SiteSpin:
    """Spin operators ``S^x, S^y, S^z, S^+, S^-`` at site ``i`` (``S = sigma/2``)."""
    sx = site_operator(sys, i, pauli("x") / 2)
    sy = site_operator(sys, i, pauli("y") / 2)
    sz = site_operator(sys, i, pauli("z") / 2)
    return SiteSpin(sx, sy, sz, sx + 1j * sy, sx - 1j * sy)


def all_spin_ops(sys: SpinSystem) -> list[SiteSpin]:
    return [spin_ops(sys, i) for i in range(sys.site_count)]


# --- matrix algebra -------------------------------------------------------
# Thin wrappers that enforce conformable shapes; numpy supplies the arithmetic.


def _conform(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _conform(a, b)
    return a @ b


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _conform(a, b)
    return a + b


def scale(c: complex, a: np.ndarray) -> np.ndarray:
    return c * np.asarray(a)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def conjugate_entrywise(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _conform(a, b)
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _conform(a, b)
    return a @ b + b @ a


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def matrix_exponential_diagonal(d: np.ndarray) -> np.ndarray:
    """``exp(D)`` for a diagonal matrix ``D`` (off-diagonal entries must be zero)."""
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("expected a square matrix")
    diag = np.diag(d)
    if np.any(d - np.diag(diag)):
        raise ValueError("matrix_exponential_diagonal requires a diagonal matrix")
    return np.diag(np.exp(diag))


def relative_residual(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b||_F / max(||b||_F, tiny)``."""
    nb = frobenius_norm(b)
    return frobenius_norm(a - b) / (nb if nb > 0 else 1.0)


# --- states -----------------------------------------------------------------


def state_vector(amplitudes, sys: SpinSystem | None = None) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if sys is not None and psi.size != sys.hilbert_dim:
        raise ValueError(f"state has dimension {psi.size}, system needs {sys.hilbert_dim}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    return psi


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                         psd_tol: float = 1e-8) -> dict:
    """Return the three density-matrix diagnostics; raise ``ValueError`` on violation."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    trace_err = float(abs(np.trace(rho) - 1.0))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
    if trace_err > trace_tol:
        raise ValueError(f"density matrix trace deviates from 1 by {trace_err:.3e}")
    if min_eig < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")
    return {"hermiticity": herm, "trace_error": trace_err, "min_eigenvalue": min_eig}


def density_matrix(psi: np.ndarray) -> np.ndarray:
    psi = state_vector(psi)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
