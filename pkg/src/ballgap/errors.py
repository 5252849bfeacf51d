"""Exception types shared across the package."""


class UsageError(ValueError):
    """Caller violated an operation's contract."""


class BackendMismatchError(UsageError):
    """Element does not have the shape required by the backend it was used with."""


class OutOfRangeError(LookupError):
    """Requested value lies outside the cached distance table."""


class ResourceError(RuntimeError):
    """Predicted or actual enumeration size exceeds the configured budget."""


class CapabilityError(RuntimeError):
    """Request is beyond the exact-computation limits of this build."""


class ConstructionError(RuntimeError):
    """A set construction could not satisfy its defining conditions."""


class ValidationError(ValueError):
    """Experiment configuration failed validation; message lists field paths."""
