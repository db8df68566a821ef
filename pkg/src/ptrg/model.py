"""
Model data and operator builders for XXZ and XYZ Richardson-Gaudin charges.

Coupling matrices are stored with the coupling strength ``g`` already folded
in, so a charge is always

    Q_i = sum_a B_i^a S_i^a + sum_{k != i} sum_a Gamma^a_ik S_i^a S_k^a

with ``a`` in ``x, y, z``.  For the XXZ families ``GammaY == GammaX``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import NonPositiveRadicand, SingularDifference
from .qops import SpinSystem, pauli

AXES = ("x", "y", "z")
FAMILIES = ("rational", "trigonometric", "hyperbolic")
POLE_TOL = 1e-12


@dataclass(frozen=True)
class CouplingSet:
    """Fields ``B`` and couplings ``Gamma`` defining N conserved charges."""

    epsilon: np.ndarray
    g: float
    Bx: np.ndarray
    By: np.ndarray
    Bz: np.ndarray
    GammaX: np.ndarray
    GammaY: np.ndarray
    GammaZ: np.ndarray
    label: str = ""

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float).reshape(-1)
        n = eps.size
        object.__setattr__(self, "epsilon", eps)
        for name in ("Bx", "By", "Bz"):
            v = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            if v.size != n:
                raise ValueError(f"{name} must have {n} entries")
            object.__setattr__(self, name, v)
        for name in ("GammaX", "GammaY", "GammaZ"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
            if np.any(np.diag(m) != 0):
                raise ValueError(f"{name} must have an exactly zero diagonal")
            object.__setattr__(self, name, m)
        if len(np.unique(eps)) != n:
            raise ValueError("epsilon entries must be distinct")

    @property
    def n(self) -> int:
        return self.epsilon.size

    def field(self, axis: str) -> np.ndarray:
        return {"x": self.Bx, "y": self.By, "z": self.Bz}[axis]

    def gamma(self, axis: str) -> np.ndarray:
        return {"x": self.GammaX, "y": self.GammaY, "z": self.GammaZ}[axis]

    def replace(self, **changes) -> "CouplingSet":
        kw = {k: getattr(self, k) for k in
              ("epsilon", "g", "Bx", "By", "Bz", "GammaX", "GammaY", "GammaZ", "label")}
        kw.update(changes)
        return CouplingSet(**kw)


def coupling_family(kind: str, ei: float, ej: float) -> tuple[float, float]:
    """``(Gamma^x, Gamma^z)`` of the rational, trigonometric or hyperbolic family."""
    d = ei - ej
    if kind == "rational":
        if abs(d) < POLE_TOL:
            raise SingularDifference(f"rational coupling has a pole at d={d}")
        return 1.0 / d, 1.0 / d
    if kind == "trigonometric":
        s = np.sin(d)
        if abs(s) < POLE_TOL:
            raise SingularDifference(f"trigonometric coupling has a pole at d={d}")
        return 1.0 / s, np.cos(d) / s
    if kind == "hyperbolic":
        if abs(d) < POLE_TOL:
            raise SingularDifference(f"hyperbolic coupling has a pole at d={d}")
        return 1.0 / np.sinh(d), 1.0 / np.tanh(d)
    raise ValueError(f"unknown coupling family {kind!r}; expected one of {FAMILIES}")


def xxz_couplings(family: str, epsilon, g: float, imaginary_x_coupling: bool = False) -> CouplingSet:
    """XXZ charges of one coupling family with ``B = (0, 0, 1)``.

    With ``imaginary_x_coupling`` the transverse couplings become
    ``i * gamma_ij`` (the PT deformation of the pairing model).
    """
    eps = np.asarray(epsilon, dtype=float)
    n = eps.size
    gx = np.zeros((n, n), dtype=complex)
    gz = np.zeros((n, n), dtype=complex)
    for i, j in itertools.permutations(range(n), 2):
        gx[i, j], gz[i, j] = coupling_family(family, eps[i], eps[j])
    gx *= g * (1j if imaginary_x_coupling else 1.0)
    gz *= g
    zeros = np.zeros(n)
    return CouplingSet(eps, g, zeros, zeros, np.ones(n), gx, gx.copy(), gz,
                       label=f"xxz-{family}" + ("-pt" if imaginary_x_coupling else ""))


@dataclass(frozen=True)
class XYZFieldParams:
    """Parameters of the integrable XYZ model in an arbitrary field."""

    alpha_x: float
    alpha_y: float
    beta_x: float
    beta_y: float
    delta: complex
    lam: complex
    epsilon: tuple
    g: float

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float)
        rx = self.alpha_x * eps + self.beta_x
        ry = self.alpha_y * eps + self.beta_y
        if np.any(rx <= 0) or np.any(ry <= 0):
            raise NonPositiveRadicand(
                "alpha_x*eps_i + beta_x and alpha_y*eps_i + beta_y must be positive for every i"
            )

    def radicands(self) -> tuple[np.ndarray, np.ndarray]:
        eps = np.asarray(self.epsilon, dtype=float)
        return self.alpha_x * eps + self.beta_x, self.alpha_y * eps + self.beta_y


def build_fields_xyz(p: XYZFieldParams) -> CouplingSet:
    """Fields and couplings of the XYZ parametrization.

    ``B^x_i = delta / sqrt(rx_i)``, ``B^y_i = lambda / sqrt(ry_i)``, ``B^z_i = 1``
    and, with ``d = eps_i - eps_j``::

        Gamma^x_ij = g sqrt(rx_i ry_j) / d
        Gamma^y_ij = g sqrt(ry_i rx_j) / d
        Gamma^z_ij = g sqrt(rx_j ry_j) / d

    where ``rx_i = alpha_x eps_i + beta_x`` and ``ry_i = alpha_y eps_i + beta_y``.
    """
    eps = np.asarray(p.epsilon, dtype=float)
    rx, ry = p.radicands()
    n = eps.size
    bx = p.delta / np.sqrt(rx)
    by = p.lam / np.sqrt(ry)
    gx = np.zeros((n, n), dtype=complex)
    gy = np.zeros((n, n), dtype=complex)
    gz = np.zeros((n, n), dtype=complex)
    for i, j in itertools.permutations(range(n), 2):
        d = eps[i] - eps[j]
        if abs(d) < POLE_TOL:
            raise SingularDifference("epsilon entries must be distinct")
        gx[i, j] = p.g * np.sqrt(rx[i] * ry[j]) / d
        gy[i, j] = p.g * np.sqrt(ry[i] * rx[j]) / d
        gz[i, j] = p.g * np.sqrt(rx[j] * ry[j]) / d
    return CouplingSet(eps, p.g, bx, by, np.ones(n), gx, gy, gz, label="xyz-field")


# --- integrability -----------------------------------------------------------


@dataclass(frozen=True)
class XXZIntegrability:
    antisymmetry_x: float
    antisymmetry_z: float
    triple: float

    @property
    def max_residual(self) -> float:
        return max(self.antisymmetry_x, self.antisymmetry_z, self.triple)


def check_integrability_xxz(cs: CouplingSet) -> XXZIntegrability:
    """Residuals of the XXZ antisymmetry and triple-product conditions."""
    if not np.array_equal(cs.GammaX, cs.GammaY):
        raise ValueError("XXZ check needs GammaY == GammaX")
    gx, gz = cs.GammaX, cs.GammaZ
    anti_x = float(np.max(np.abs(gx + gx.T))) if cs.n > 1 else 0.0
    anti_z = float(np.max(np.abs(gz + gz.T))) if cs.n > 1 else 0.0
    triple = 0.0
    for i, j, k in itertools.permutations(range(cs.n), 3):
        r = gx[i, j] * gx[j, k] - gx[i, k] * (gz[i, j] + gz[j, k])
        triple = max(triple, abs(r))
    return XXZIntegrability(anti_x, anti_z, float(triple))


@dataclass(frozen=True)
class XYZIntegrability:
    """Residuals of the linear (field) and quadratic (coupling) conditions.

    ``linear`` is ``max |Gamma^b_ij B^a_j + Gamma^c_ji B^a_i|`` over all axis
    permutations ``(a, b, c)``, the form obtained by expanding
    ``[Q_i, Q_j]``.  ``linear_as_printed`` evaluates the variant with
    ``Gamma^a_ji`` in the second term; it is reported for comparison and does
    not enter ``max_residual``.
    """

    linear: float
    quadratic: float
    linear_as_printed: float
    per_permutation: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.linear, self.quadratic)


def check_integrability_xyz(cs: CouplingSet) -> XYZIntegrability:
    n = cs.n
    lin = quad = printed = 0.0
    per = {}
    for a, b, c in itertools.permutations(AXES):
        ga, gb, gc = cs.gamma(a), cs.gamma(b), cs.gamma(c)
        ba = cs.field(a)
        r_lin = r_printed = r_quad = 0.0
        for i, j in itertools.permutations(range(n), 2):
            r_lin = max(r_lin, abs(gb[i, j] * ba[j] + gc[j, i] * ba[i]))
            r_printed = max(r_printed, abs(gb[i, j] * ba[j] + ga[j, i] * ba[i]))
        for i, j, k in itertools.permutations(range(n), 3):
            r = ga[i, k] * gb[j, k] - ga[i, j] * gc[j, k] - gb[j, i] * gc[i, k]
            r_quad = max(r_quad, abs(r))
        per[a + b + c] = {"linear": float(r_lin), "linear_as_printed": float(r_printed),
                          "quadratic": float(r_quad)}
        lin, quad, printed = max(lin, r_lin), max(quad, r_quad), max(printed, r_printed)
    return XYZIntegrability(float(lin), float(quad), float(printed), per)


# --- operator builders -------------------------------------------------------


def _local(axis: str, convention: str) -> np.ndarray:
    s = pauli(axis)
    return s if convention == "pauli" else s / 2


def _kron_sites(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    return reduce(np.kron, [ops.get(k, eye) for k in range(n)])


def _check_dims(sys: SpinSystem, cs: CouplingSet) -> None:
    if sys.site_count != cs.n:
        raise ValueError(f"system has {sys.site_count} sites but couplings describe {cs.n}")


def build_charge(sys: SpinSystem, cs: CouplingSet, i: int, convention: str = "spin") -> np.ndarray:
    """Conserved charge ``Q_i``.

    ``convention="spin"`` uses ``S = sigma/2`` (the physical charge);
    ``convention="pauli"`` substitutes the Pauli matrices themselves, which is
    the normalization in which the quadratic operator relation holds with
    the closed-form ``C_ik`` and ``K_i``.
    """
    _check_dims(sys, cs)
    if not 0 <= i < cs.n:
        raise IndexError(f"site {i} out of range")
    if convention not in ("spin", "pauli"):
        raise ValueError("convention must be 'spin' or 'pauli'")
    n = cs.n
    q = np.zeros((sys.hilbert_dim,) * 2, dtype=complex)
    for a in AXES:
        loc = _local(a, convention)
        b = cs.field(a)[i]
        if b != 0:
            q += b * _kron_sites(n, {i: loc})
        gam = cs.gamma(a)
        for k in range(n):
            if k != i and gam[i, k] != 0:
                q += gam[i, k] * _kron_sites(n, {i: loc, k: loc})
    return q


def build_charges(sys: SpinSystem, cs: CouplingSet, convention: str = "spin") -> list[np.ndarray]:
    return [build_charge(sys, cs, i, convention) for i in range(cs.n)]


def _flip_flop(n: int, i: int, j: int) -> np.ndarray:
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.copy()
    return _kron_sites(n, {i: sp, j: sm}) + _kron_sites(n, {i: sm, j: sp})


def build_hamiltonian_xxz(sys: SpinSystem, cs: CouplingSet) -> np.ndarray:
    """Pairing Hamiltonian ``sum eps_i S^z_i + sum_{i!=j} (Gx_ij flip-flop_ij + Gz_ij S^z_i S^z_j)``.

    ``Gx`` multiplies ``S_i^+ S_j^- + S_i^- S_j^+`` here, as written for the
    pairing model.  The flip-flop and ``S^z S^z`` terms are symmetric under
    ``i <-> j``, so antisymmetric couplings cancel in this sum.
    """
    _check_dims(sys, cs)
    n = cs.n
    sz = pauli("z") / 2
    h = np.zeros((sys.hilbert_dim,) * 2, dtype=complex)
    for i in range(n):
        h += cs.epsilon[i] * _kron_sites(n, {i: sz})
    for i, j in itertools.permutations(range(n), 2):
        if cs.GammaX[i, j] != 0:
            h += cs.GammaX[i, j] * _flip_flop(n, i, j)
        if cs.GammaZ[i, j] != 0:
            h += cs.GammaZ[i, j] * _kron_sites(n, {i: sz, j: sz})
    return h


def build_charge_xxz_flipflop(sys: SpinSystem, cs: CouplingSet, i: int) -> np.ndarray:
    """XXZ charge written with the flip-flop term, ``B^z_i S^z_i + sum_k (Gx flip-flop + Gz S^z S^z)``.

    Kept for comparison: it equals :func:`build_charge` only after halving
    ``GammaX``, because ``S^+S^- + S^-S^+ = 2 (S^x S^x + S^y S^y)``.
    """
    _check_dims(sys, cs)
    n = cs.n
    sz = pauli("z") / 2
    q = cs.Bz[i] * _kron_sites(n, {i: sz})
    for k in range(n):
        if k == i:
            continue
        q = q + cs.GammaX[i, k] * _flip_flop(n, i, k) + cs.GammaZ[i, k] * _kron_sites(n, {i: sz, k: sz})
    return q


def build_hamiltonian_from_charges(charges, weights) -> np.ndarray:
    charges = list(charges)
    weights = list(weights)
    if len(charges) != len(weights):
        raise ValueError(f"{len(charges)} charges but {len(weights)} weights")
    if not charges:
        raise ValueError("need at least one charge")
    h = np.zeros_like(charges[0], dtype=complex)
    for w, q in zip(weights, charges):
        h = h + w * q
    return h
