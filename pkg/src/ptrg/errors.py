"""Exception types raised across the package."""

from __future__ import annotations


class PTRGError(Exception):
    """Base class for every error raised by ptrg."""


class NumericalFailure(PTRGError):
    """A computation ran but could not meet its numerical contract."""


class NearDefective(NumericalFailure):
    """Left/right eigenvector pairing failed; the matrix is numerically defective."""


class SingularDifference(PTRGError, ValueError):
    """A coupling was requested at (or next to) one of its poles."""


class NonPositiveRadicand(PTRGError, ValueError):
    pass


class BrokenPTPhase(PTRGError):
    """Some eigenvalue is complex, so the PT signature is undefined."""


class SignatureNotUnimodular(NumericalFailure):
    """Parity does not map right eigenvectors onto left ones for this operator."""


class Inapplicable(PTRGError):
    """The diagonal eta-ansatz cannot Hermitize the given couplings."""

    def __init__(self, residual: float, q=None):
        super().__init__(f"eta-ansatz inapplicable, residual {residual:.3e}")
        self.residual = residual
        self.q = q


class VanishingNorm(NumericalFailure):
    pass


class AllDenominatorsVanish(PTRGError, ValueError):
    pass


class PoleAtEpsilon(PTRGError, ValueError):
    pass


class NonHermitianHamiltonian(PTRGError, ValueError):
    pass


class PositivityLost(NumericalFailure):
    """Density matrix acquired a negative eigenvalue; the step is too coarse."""

    def __init__(self, time: float, min_eig: float):
        super().__init__(f"positivity lost at t={time:.6g} (min eigenvalue {min_eig:.3e})")
        self.time = time
        self.min_eig = min_eig


class WindowTooSmall(PTRGError, ValueError):
    pass


class ZeroLongitudinalField(PTRGError, ValueError):
    pass


class DefectiveH0(NumericalFailure):
    pass


class UnresolvedDegeneracy(NumericalFailure):
    """The perturbation does not lift a degenerate cluster at first order."""


class TrackingLost(NumericalFailure):
    pass


class NonConvergence(NumericalFailure):
    def __init__(self, residual: float, g_reached: float):
        super().__init__(
            f"Newton/homotopy did not converge (best residual {residual:.3e}, reached g={g_reached:.6g})"
        )
        self.residual = residual
        self.g_reached = g_reached


class RootCollision(NumericalFailure):
    pass


class RootAtEpsilon(PTRGError, ValueError):
    pass


class ConfigError(PTRGError, ValueError):
    """Invalid run configuration (maps to CLI exit code 2)."""
