"""Exception types shared across the library.

The CLI maps any :class:`NumericsError` subclass to exit code 3 and prints
the class name on stderr, so these names are part of the user-facing
contract.
"""


class NumericsError(Exception):
    """Base class for numerical failures."""


class NonFinite(NumericsError):
    """Input contains NaN or Inf entries."""


class ConvergenceFailure(NumericsError):
    """An iterative kernel (eigensolver) failed to converge or lost accuracy."""


class InvalidGeometry(NumericsError):
    """Resonator geometry violates positivity / disjointness constraints."""


class OutOfDomain(NumericsError):
    """Evaluation point lies outside the admissible domain of a branch."""


class EmptyBranch(NumericsError):
    """The requested gap branch has no real values off beta = 0."""


class NoGapMode(NumericsError):
    """Finite chain has no eigenvalue strictly inside the bulk band gap."""


class OutOfGap(NumericsError):
    """Frequency does not sit inside the bulk gap, decay rate undefined."""


class RayleighSingular(NumericsError):
    """A term of a dual-lattice sum has a (near-)vanishing denominator."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending  # dual-lattice integer index (m1, m2)


class TruncationTooSmall(NumericsError):
    """Lattice truncation check failed: entries still move when n grows."""


class SingularSLP(NumericsError):
    """Discretized single-layer potential is numerically singular."""


class NoConvergence(NumericsError):
    """Root finder hit its iteration cap without meeting the tolerance."""


class Stagnation(NumericsError):
    """Root finder steps collapsed while the residual is still large."""


class DegenerateEigenvalues(UserWarning):
    """Transfer-matrix eigenvalues coincide; quasimomentum pairing ambiguous."""
