"""
Richardson equations for the rational pairing model.

For ``H_R = sum_i 2 eps_i S^z_i + g sum_{i,j} S^+_i S^-_j`` the state
``prod_a (sum_i S^+_i / (eps_i - E_a)) |down...down>`` is an eigenstate when the
roots solve

    F_a(E) = 1/g + 1/2 sum_j 1/(eps_j - E_a) - sum_{b != a} 1/(E_b - E_a) = 0.

With a single pair this follows by acting with ``H_R`` on the one-flip state:
the coefficients ``c_i = 1/(eps_i - E)`` reproduce themselves provided the
equation above holds, and the eigenvalue is ``2E - sum_i eps_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .eig import _clusters, eig_general
from .errors import NonConvergence, RootAtEpsilon, RootCollision, VanishingNorm
from .qops import SpinSystem, spin_ops

COLLISION_GAP = 1e-10
DETOUR_PHASE = 0.3  # radians; fixed phase bulge of the complex-g retry path
FLOOR_CAP = 1e-6  # largest relative residual an intermediate homotopy point may keep


@dataclass(frozen=True)
class RichardsonProblem:
    epsilon: np.ndarray
    g: float
    M: int

    def __post_init__(self):
        eps = np.asarray(self.epsilon, dtype=float).reshape(-1)
        object.__setattr__(self, "epsilon", eps)
        if len(np.unique(eps)) != eps.size:
            raise ValueError("epsilon entries must be distinct")
        if not 1 <= self.M <= eps.size:
            raise ValueError(f"M must be in [1, {eps.size}], got {self.M}")
        if self.g == 0 or not np.isfinite(self.g):
            raise ValueError("g must be finite and nonzero")

    @property
    def N(self) -> int:
        return self.epsilon.size


@dataclass(frozen=True)
class BetheRoots:
    """Roots at ``g`` with the raw residual ``max |F_a|`` and the homotopy record.

    ``trace`` holds ``(g, roots)`` at every accepted homotopy point and
    ``newton_history`` the residuals of the Newton iterates at the final ``g``.
    """

    roots: np.ndarray
    residual: float
    g: float
    trace: tuple
    newton_history: tuple
    perturbed: bool = False
    min_gap: float = field(default=np.inf)

    @property
    def coalesced(self) -> bool:
        return self.min_gap <= COLLISION_GAP


def _pair_inverse(e: np.ndarray, power: int) -> np.ndarray:
    """``1 / (E_b - E_a)^power`` at ``[a, b]`` with a zero diagonal."""
    diff = e[None, :] - e[:, None]
    off = ~np.eye(e.size, dtype=bool)
    out = np.zeros_like(diff)
    out[off] = 1.0 / diff[off] ** power
    return out


def richardson_residual(epsilon, g: float, roots) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=float)
    e = np.asarray(roots, dtype=complex)
    out = 1.0 / g + 0.5 * np.sum(1.0 / (eps[None, :] - e[:, None]), axis=1)
    return out - np.sum(_pair_inverse(e, 1), axis=1)


def richardson_jacobian(epsilon, roots) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=float)
    e = np.asarray(roots, dtype=complex)
    inv2 = _pair_inverse(e, 2)
    jac = inv2.copy()
    diag = 0.5 * np.sum(1.0 / (eps[None, :] - e[:, None]) ** 2, axis=1) - inv2.sum(axis=1)
    jac[np.diag_indices_from(jac)] = diag
    return jac


def _tol(g: float, tol: float) -> float:
    return tol * max(1.0, 1.0 / abs(g))


def _min_gap(roots) -> float:
    if len(roots) < 2:
        return np.inf
    return float(min(abs(a - b) for a, b in itertools.combinations(roots, 2)))


def _continuous(old, new, eps) -> bool:
    """Whether every root moved less than its distance to the nearest singularity.

    A larger move means Newton has jumped to a different solution branch.
    """
    dist = np.min(np.abs(old[:, None] - eps[None, :]), axis=1)
    if old.size > 1:
        pair = np.abs(old[:, None] - old[None, :])
        np.fill_diagonal(pair, np.inf)
        dist = np.minimum(dist, pair.min(axis=1))
    return bool(np.all(np.abs(new - old) < dist))


def _newton(eps, g, start, tol, max_iter, strict=True):
    """Newton iteration; ``strict=False`` also accepts the rounding floor ``|J| ulp(E)``.

    Near ``g = 0`` each root sits within ``O(g)`` of a pole, and the residual
    cannot be resolved below roughly ``|dF/dE| * ulp(E)``; intermediate
    homotopy points use that floor, the final target never does.
    """
    e = start.copy()
    hist = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_iter):
            f = richardson_residual(eps, g, e)
            r = float(np.max(np.abs(f)))
            hist.append(r)
            if not np.isfinite(r):
                return None, hist
            jac = richardson_jacobian(eps, e)
            goal = _tol(g, tol)
            if not strict:
                # the floor grows with |E|, so cap it to keep escaped iterates out
                floor = 64 * np.finfo(float).eps * np.max(np.abs(e) + 1) * np.max(np.abs(jac))
                goal = max(goal, min(floor, FLOOR_CAP * max(1.0, 1.0 / abs(g))))
            if r <= goal:
                return e, hist
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                return None, hist
            e = e + step
    return None, hist


def _path(g_start: float, g_end: float, checkpoints: int, detour: bool) -> np.ndarray:
    """Geometric grid in ``|g|``; with ``detour`` the phase bulges off the real axis."""
    mag = np.geomspace(abs(g_start), abs(g_end), checkpoints)
    grid = mag * np.sign(g_end) + 0j
    if detour:
        tau = np.linspace(0.0, 1.0, checkpoints)
        grid = grid * np.exp(1j * DETOUR_PHASE * np.sin(np.pi * tau))
    grid[0], grid[-1] = g_start, g_end
    return grid


def _homotopy(p: RichardsonProblem, seeds, g_start, tol, checkpoints, min_step, max_iter,
              detour=False):
    eps = p.epsilon
    grid = _path(g_start, p.g, checkpoints, detour)
    roots, hist = _newton(eps, grid[0], seeds, tol, max_iter, strict=grid.size == 1)
    if roots is None:
        raise NonConvergence(hist[-1] if hist else np.inf, complex(grid[0]))
    trace = [(complex(grid[0]), roots.copy())]
    g_now, best = complex(grid[0]), hist[-1]
    for target in grid[1:]:
        while g_now != target:
            full = step = target - g_now
            while True:
                g_try = target if step == full else g_now + step
                new, hist = _newton(eps, g_try, roots, tol, max_iter, strict=g_try == p.g)
                if new is not None and _min_gap(new) > COLLISION_GAP and \
                        np.min(np.abs(new[:, None] - eps[None, :])) > COLLISION_GAP and \
                        _continuous(roots, new, eps):
                    break
                if new is not None and _min_gap(new) <= COLLISION_GAP:
                    raise RootCollision(f"roots coalesced near g={g_try:.6g}")
                if hist:
                    best = min(best, hist[-1])
                step /= 2
                if abs(step) < min_step:
                    raise NonConvergence(best, g_now)
            roots, g_now = new, complex(g_try)
        trace.append((g_now, roots.copy()))
    return roots, tuple(trace), tuple(hist)


def solve_richardson(p: RichardsonProblem, target_g: float | None = None, tol: float = 1e-10,
                     checkpoints: int = 20, start_fraction: float = 1e-4, min_step: float = 1e-6,
                     max_iter: int = 50, seed_levels=None) -> BetheRoots:
    """Solve the Richardson equations by Newton continuation in ``g``.

    The walk starts at ``g = start_fraction * target_g`` with
    ``E_a = eps_{seed_levels[a]} + g/2`` (default: the first ``M`` levels) and
    follows a geometric grid of ``checkpoints`` values of ``g``, halving the
    step on Newton failure until it drops below ``min_step``.  Success means
    ``max |F_a| <= tol * max(1, 1/|g|)``; the ``1/g`` term dominates the
    equations as ``g -> 0`` so the tolerance is scaled with it.

    Raises
    ------
    NonConvergence
        With the best residual reached and the last accepted ``g``.
    RootCollision
        When two roots meet (gap below 1e-10) on the retry path as well.
        After any failure of the real path the walk is repeated once along a
        complex-g path with phase ``DETOUR_PHASE * sin(pi tau)``, which avoids
        the real singular points and returns to the real target.
    """
    g = p.g if target_g is None else float(target_g)
    if g == 0:
        raise ValueError("target g must be nonzero")
    if target_g is not None:
        p = RichardsonProblem(p.epsilon, g, p.M)
    levels = np.arange(p.M) if seed_levels is None else np.asarray(seed_levels, dtype=int)
    if levels.size != p.M or len(set(levels.tolist())) != p.M:
        raise ValueError("seed_levels must name M distinct levels")
    g0 = start_fraction * g
    seeds = p.epsilon[levels] + g0 / 2 + 0j

    perturbed = False
    try:
        roots, trace, hist = _homotopy(p, seeds, g0, tol, checkpoints, min_step, max_iter)
    except (RootCollision, NonConvergence):
        # Roots meeting each other or a pole stall the real path, and perturbed
        # real seeds are pulled straight back onto it by Newton; the retry
        # therefore gives g itself a fixed imaginary part between the endpoints.
        perturbed = True
        roots, trace, hist = _homotopy(p, seeds, g0, tol, checkpoints, min_step, max_iter,
                                       detour=True)
    residual = float(np.max(np.abs(richardson_residual(p.epsilon, g, roots))))
    return BetheRoots(roots, residual, g, trace, hist, perturbed, _min_gap(roots))


def energy_from_roots(epsilon, roots) -> complex:
    """Eigenvalue ``2 sum_a E_a - sum_i eps_i`` of ``H_R`` on the Bethe state."""
    return complex(2 * np.sum(roots) - np.sum(epsilon))


def richardson_hamiltonian(sys: SpinSystem, epsilon, g: float) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=float)
    if eps.size != sys.site_count:
        raise ValueError("epsilon length does not match the system")
    ops = [spin_ops(sys, i) for i in range(sys.site_count)]
    h = sum(2 * e * o.z for e, o in zip(eps, ops))
    plus = sum(o.plus for o in ops)
    minus = sum(o.minus for o in ops)
    return h + g * plus @ minus


@dataclass(frozen=True)
class BetheState:
    vector: np.ndarray
    normalized: np.ndarray
    norm: float


def bethe_state(sys: SpinSystem, epsilon, roots, pole_tol: float = 1e-12) -> BetheState:
    eps = np.asarray(epsilon, dtype=float)
    if eps.size != sys.site_count:
        raise ValueError("epsilon length does not match the system")
    plus = [spin_ops(sys, i).plus for i in range(sys.site_count)]
    psi = np.zeros(sys.hilbert_dim, dtype=complex)
    psi[-1] = 1.0  # all spins down
    for e in np.asarray(roots, dtype=complex).reshape(-1):
        d = eps - e
        if np.min(np.abs(d)) < pole_tol:
            raise RootAtEpsilon(f"root {e} coincides with an epsilon")
        creator = sum(op / di for op, di in zip(plus, d))
        psi = creator @ psi
    nrm = float(np.linalg.norm(psi))
    if nrm == 0:
        raise VanishingNorm("Bethe state vanishes")
    return BetheState(psi, psi / nrm, nrm)


@dataclass(frozen=True)
class EigenstateCheck:
    rayleigh: complex
    residual: float
    overlap: float
    nearest_eigenvalue: complex


def verify_eigenstate(h: np.ndarray, state: np.ndarray, cluster_tol: float = 1e-9) -> EigenstateCheck:
    """Rayleigh quotient, eigen-residual and overlap with the closest exact eigenspace.

    The overlap is ``||Pi psi||^2`` where ``Pi`` is the orthogonal projector on
    the span of the exact eigenvectors whose eigenvalue is nearest to the
    Rayleigh quotient (degenerate levels are grouped).
    """
    psi = np.asarray(state, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    hpsi = h @ psi
    ray = complex(np.vdot(psi, hpsi))
    residual = float(np.linalg.norm(hpsi - ray * psi))
    decomp = eig_general(h)
    evals = decomp.eigenvalues
    scale = max(1.0, float(np.max(np.abs(evals))))
    nearest = int(np.argmin(np.abs(evals - ray)))
    group = next(gr for gr in _clusters(evals, cluster_tol * scale) if nearest in gr)
    q, _ = np.linalg.qr(decomp.right[:, group])
    overlap = float(np.linalg.norm(q.conj().T @ psi) ** 2)
    return EigenstateCheck(ray, residual, overlap, complex(evals[nearest]))
