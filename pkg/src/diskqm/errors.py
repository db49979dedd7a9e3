"""Exception hierarchy shared by every module."""


class DiskQmError(Exception):
    """Base class for all library errors."""


class DomainError(DiskQmError, ValueError):
    """A point lies outside the closed unit disk."""


class SpecError(DiskQmError, ValueError):
    """A map/isotopy spec record could not be parsed."""


class PreconditionError(DiskQmError):
    """An operation was called outside the subgroup it is defined on."""


class BoundaryIdentityRequired(PreconditionError):
    pass


class OriginNotFixed(PreconditionError):
    pass


class AnchorNotFixed(PreconditionError):
    pass


class BoundaryConstancyError(PreconditionError):
    """Hamiltonian is not spatially constant on the boundary circle."""


class EndpointNotIdentity(PreconditionError):
    pass


class LiftError(DiskQmError):
    """Boundary restriction is not an orientation-preserving circle map."""
