"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`InvalidInputError` gives 2, and
:class:`NumericalFailure` with its subclasses gives 3.
"""


class KinklabError(Exception):
    """Base class for all library errors."""


class InvalidInputError(KinklabError, ValueError):
    """A precondition on user-facing input is violated."""


class CapabilityError(KinklabError):
    """The request exceeds what an object can provide (e.g. derivative order)."""


class NumericalFailure(KinklabError):
    """A numerical procedure did not reach its accuracy target."""


class NearSingularError(NumericalFailure):
    """A shifted operator is (numerically) singular and no deflation was given."""


class GroundStateError(NumericalFailure):
    """A supposed ground state changes sign or is not an eigenfunction."""


class CascadeInconsistencyError(NumericalFailure):
    """A Darboux stage failed to remove exactly one eigenvalue."""


class DomainTooSmallError(NumericalFailure):
    """The potential has not reached its asymptote at the grid edges."""


class DegenerateFrameError(NumericalFailure):
    """The discrete-mode frame matrix is singular."""


class GenericityViolation(NumericalFailure):
    """A non-resonant solve hit an eigenvalue outside the resonance bookkeeping."""


class DependencyError(KinklabError):
    """A required lower-order object has not been constructed."""


class InternalConsistencyError(NumericalFailure):
    """Two independent computations of the same quantity disagree."""
