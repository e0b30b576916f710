class SpectraError(ValueError):
    """
    Base class for every refusal raised by the services. The CLI maps ``exit_code`` to the process exit status and
    the routers map ``http_status`` to the response status.
    """
    exit_code: int = 1
    http_status: int = 400


class InvalidParameters(SpectraError):
    """Physical inputs violate their invariants (m > 0, e > 0, omega >= 0, s_z = +-1/2)."""


class InvalidRequest(SpectraError):
    """Run settings are unusable: k < 1, a bad cutoff schedule, negative enumeration bounds, an empty grid."""


class IllPosed(SpectraError):
    exit_code = 3
    http_status = 409


class InvalidField(SpectraError):
    pass


class MissingPartner(SpectraError):
    pass


class CutoffTooSmall(SpectraError):
    pass


class DimensionMismatch(SpectraError):
    pass


class InvalidScale(SpectraError):
    pass


class InvalidMargin(SpectraError):
    pass


class NotHermitian(SpectraError):
    pass


class AnalyticUnavailable(SpectraError):
    pass


class NotAtCriticalPoint(SpectraError):
    pass


class NoSignChange(SpectraError):
    exit_code = 2
    http_status = 422


class UnknownModel(SpectraError):
    pass


class UnknownParameter(SpectraError):
    pass
