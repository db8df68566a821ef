"""
Closed (Schroedinger) and open (Lindblad) time evolution with per-site spin
expectations sampled on a time grid.  Units have hbar = 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .eig import eig_general
from .errors import NearDefective, NonHermitianHamiltonian, PositivityLost, VanishingNorm, WindowTooSmall
from .ptsym import PTOperators
from .qops import SpinSystem, all_spin_ops, site_operator

DEFAULT_DT = 1e-3


class Mode(str, enum.Enum):
    STANDARD = "ClosedStandard"
    CP = "ClosedCPWeighted"
    LINDBLAD = "Lindblad"


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled per-site ``<S^a>`` (arrays of shape ``(T, N)``).

    ``norm_or_trace`` is ``||psi(t)||`` for closed runs and ``Tr rho(t)`` for
    Lindblad runs.  ``max_imag`` is the largest imaginary part discarded from
    the expectations (nonzero only in CP-weighted mode).
    """

    times: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    norm_or_trace: np.ndarray
    mode: Mode
    method: str
    broken_pt: bool = False
    max_imag: float = 0.0
    dt: float | None = None

    @property
    def site_count(self) -> int:
        return self.sz.shape[1]

    def component(self, axis: str) -> np.ndarray:
        return {"x": self.sx, "y": self.sy, "z": self.sz}[axis]


@dataclass(frozen=True)
class LindbladSpec:
    """Damping rate ``gamma`` and the sites carrying ``L_k = sqrt(gamma) sigma_k^-``."""

    gamma: float
    sites: tuple

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("jump sites must be distinct")

    def jump_operators(self, sys: SpinSystem) -> np.ndarray:
        lower = np.array([[0, 0], [1, 0]], dtype=complex)
        ops = [np.sqrt(self.gamma) * site_operator(sys, k, lower) for k in self.sites]
        if not ops:
            return np.zeros((0, sys.hilbert_dim, sys.hilbert_dim), dtype=complex)
        return np.stack(ops)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size == 0:
        raise ValueError("time grid is empty")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must start at t >= 0 and be strictly increasing")
    return t


def _system_for(dim: int) -> SpinSystem:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return SpinSystem(n)


def _substeps(t0: float, t1: float, dt: float):
    """Equal steps no longer than ``dt`` covering ``[t0, t1]`` exactly."""
    span = t1 - t0
    if span <= 0:
        return 0, 0.0
    n = int(np.ceil(span / dt - 1e-9))
    return n, span / n


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _propagate_rk4(h: np.ndarray, psi0: np.ndarray, times: np.ndarray, dt: float) -> np.ndarray:
    def rhs(psi):
        return -1j * (h @ psi)

    out = np.empty((times.size, psi0.size), dtype=complex)
    psi, t = psi0.copy(), 0.0
    for k, tk in enumerate(times):
        n, step = _substeps(t, tk, dt)
        for _ in range(n):
            psi = _rk4(rhs, psi, step)
        t = tk
        out[k] = psi
    return out


def _propagate_spectral(h: np.ndarray, psi0: np.ndarray, times: np.ndarray, cond_limit: float):
    decomp = eig_general(h, cond_limit=cond_limit)
    if np.linalg.cond(decomp.right) >= cond_limit:
        return None
    coeff = decomp.left.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, decomp.eigenvalues))
    return (phases * coeff) @ decomp.right.T


def evolve_closed(h: np.ndarray, psi0: np.ndarray, times, mode: str | Mode = Mode.STANDARD,
                  pt: PTOperators | None = None, dt: float = DEFAULT_DT,
                  method: str = "auto", cond_limit: float = 1e8,
                  norm_tol: float = 1e-12) -> TrajectoryRecord:
    """Solve ``i d psi/dt = H psi`` and sample per-site spin expectations.

    Parameters
    ----------
    mode : {"ClosedStandard", "ClosedCPWeighted"}
        Standard mode reports ``<psi|A|psi>/<psi|psi>``; CP-weighted mode
        reports ``<psi|CPA|psi>/<psi|CP|psi>`` (real part; the discarded
        imaginary part is tracked in ``max_imag``) and requires ``pt``.
    method : {"auto", "spectral", "rk4"}
        ``auto`` uses the eigen-expansion when the right-eigenvector matrix has
        condition below ``cond_limit`` and RK4 with step ``dt`` otherwise.
    """
    mode = Mode(mode)
    if mode is Mode.LINDBLAD:
        raise ValueError("use evolve_lindblad for open-system runs")
    h = np.asarray(h, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if h.shape != (psi0.size, psi0.size):
        raise ValueError(f"state dimension {psi0.size} does not match H {h.shape}")
    if mode is Mode.CP and pt is None:
        raise ValueError("CP-weighted mode needs PT operators")
    times = _check_times(times)
    sys = _system_for(psi0.size)

    states, used = None, method
    if method in ("auto", "spectral"):
        try:
            states = _propagate_spectral(h, psi0, times, cond_limit)
        except NearDefective:
            states = None
        if states is None and method == "spectral":
            raise NearDefective("spectral propagation requested but eigenvectors are ill-conditioned")
        used = "spectral"
    if states is None:
        states = _propagate_rk4(h, psi0, times, dt)
        used = "rk4"

    ops = all_spin_ops(sys)
    n = sys.site_count
    vals = {a: np.empty((times.size, n)) for a in "xyz"}
    max_imag = 0.0
    cp = pt.C @ pt.P if mode is Mode.CP else None
    for k, psi in enumerate(states):
        if mode is Mode.CP:
            weighted = cp.conj().T @ psi
            den = np.vdot(weighted, psi)
        else:
            weighted = psi
            den = np.vdot(psi, psi)
        if abs(den) < norm_tol:
            raise VanishingNorm(f"normalization {abs(den):.3e} at t={times[k]}")
        for i, op in enumerate(ops):
            for a in "xyz":
                v = np.vdot(weighted, op.axis(a) @ psi) / den
                vals[a][k, i] = v.real
                max_imag = max(max_imag, abs(v.imag))
    norms = np.linalg.norm(states, axis=1)
    return TrajectoryRecord(times, vals["x"], vals["y"], vals["z"], norms, mode, used,
                            broken_pt=bool(pt.broken) if pt is not None else False,
                            max_imag=float(max_imag) if mode is Mode.CP else 0.0,
                            dt=dt if used == "rk4" else None)


def lindblad_rhs(h: np.ndarray, jumps: np.ndarray):
    """Right-hand side ``rho -> -i[H, rho] + sum_k (L rho L^+ - 1/2 {L^+L, rho})``."""
    jd = np.conj(np.transpose(jumps, (0, 2, 1)))
    heff = h - 0.5j * np.einsum("kij,kjl->il", jd, jumps)
    heff_d = heff.conj().T

    def rhs(rho):
        out = -1j * (heff @ rho - rho @ heff_d)
        if jumps.shape[0]:
            out = out + (jumps @ rho @ jd).sum(axis=0)
        return out

    return rhs


def evolve_lindblad(h: np.ndarray, rho0: np.ndarray, spec: LindbladSpec, times,
                    dt: float = DEFAULT_DT, herm_tol: float = 1e-10,
                    check_tol: float = 1e-8) -> TrajectoryRecord:
    """Integrate the Lindblad equation with fixed-step RK4 and sample ``Tr(S^a rho)``.

    Raises
    ------
    NonHermitianHamiltonian
        When ``||H - H^+|| / ||H|| >= herm_tol``.
    PositivityLost
        When a sampled ``rho`` has an eigenvalue below ``-check_tol`` or its
        trace or Hermiticity drifts by more than ``check_tol``; retry with a
        smaller ``dt``.
    """
    h = np.asarray(h, dtype=complex)
    rho = np.asarray(rho0, dtype=complex)
    nh = np.linalg.norm(h)
    if nh > 0 and np.linalg.norm(h - h.conj().T) / nh >= herm_tol:
        raise NonHermitianHamiltonian("Lindblad evolution requires a Hermitian Hamiltonian")
    if rho.shape != h.shape:
        raise ValueError(f"rho0 shape {rho.shape} does not match H {h.shape}")
    times = _check_times(times)
    sys = _system_for(h.shape[0])
    if any(not 0 <= k < sys.site_count for k in spec.sites):
        raise ValueError("jump site out of range")
    rhs = lindblad_rhs(h, spec.jump_operators(sys))

    ops = all_spin_ops(sys)
    n = sys.site_count
    vals = {a: np.empty((times.size, n)) for a in "xyz"}
    traces = np.empty(times.size)
    t = 0.0
    for k, tk in enumerate(times):
        steps, step = _substeps(t, tk, dt)
        for _ in range(steps):
            rho = _rk4(rhs, rho, step)
        t = tk
        tr = np.trace(rho)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
        if min_eig < -check_tol or herm > check_tol or abs(tr - 1) > check_tol:
            raise PositivityLost(tk, min_eig)
        traces[k] = tr.real
        for i, op in enumerate(ops):
            for a in "xyz":
                vals[a][k, i] = np.trace(op.axis(a) @ rho).real
    return TrajectoryRecord(times, vals["x"], vals["y"], vals["z"], traces, Mode.LINDBLAD,
                            "rk4", dt=dt)


def evolve_lindblad_adaptive(h, rho0, spec, times, dt: float = DEFAULT_DT,
                             min_dt: float = 1e-6, **kw) -> TrajectoryRecord:
    """:func:`evolve_lindblad`, halving ``dt`` on :class:`PositivityLost` down to ``min_dt``."""
    while True:
        try:
            return evolve_lindblad(h, rho0, spec, times, dt=dt, **kw)
        except PositivityLost:
            if dt / 2 < min_dt:
                raise
            dt /= 2


@dataclass(frozen=True)
class SteadyStateMetric:
    std: np.ndarray
    drift: np.ndarray
    samples: int
    window: tuple


def steady_state_metric(tr: TrajectoryRecord, window, axis: str = "z",
                        min_samples: int = 10) -> SteadyStateMetric:
    """Per-site population standard deviation and least-squares slope over ``window``."""
    ta, tb = window
    if ta >= tb or ta < tr.times[0] or tb > tr.times[-1]:
        raise WindowTooSmall(f"window [{ta}, {tb}] not inside [{tr.times[0]}, {tr.times[-1]}]")
    mask = (tr.times >= ta) & (tr.times <= tb)
    count = int(mask.sum())
    if count < min_samples:
        raise WindowTooSmall(f"window holds {count} samples, need {min_samples}")
    t = tr.times[mask]
    y = tr.component(axis)[mask]
    std = y.std(axis=0)
    drift = np.polyfit(t, y, 1)[0]
    return SteadyStateMetric(std, np.atleast_1d(drift), count, (float(ta), float(tb)))
