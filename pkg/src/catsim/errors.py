"""Exception hierarchy for the whole package.

Everything derives from CatsimError so callers can catch library failures
in one clause. Configuration problems and runtime aborts are kept in
separate branches because the CLI maps them to different exit codes.
"""


class CatsimError(Exception):
    """Base class for all errors raised by this package."""


class NonSkewInput(CatsimError):
    """vee() received a matrix that is not skew-symmetric."""


class DegenerateMatrix(CatsimError):
    """Matrix cannot be projected to a rotation (det <= 0 or near-singular)."""


class InadmissibleConfiguration(CatsimError):
    """Endpoint pair violates the hanging-cable admissibility conditions."""


class TautCable(InadmissibleConfiguration):
    """Endpoint separation leaves no slack; the hanging-cable model breaks down."""


class DegenerateSeparation(InadmissibleConfiguration):
    """Horizontal endpoint separation too small to define the cable plane."""


class NoConvergence(CatsimError):
    """Iterative solver exhausted its budget without meeting tolerance."""


class ParamOutOfRange(CatsimError):
    """Arc-length style parameter outside the valid interval."""


class DegenerateForce(CatsimError):
    """Commanded force vector too small to define a thrust direction."""


class HeadingDegenerate(CatsimError):
    """Desired heading nearly parallel to the thrust axis."""


class InsufficientSamples(CatsimError):
    """Too few trace samples for the requested statistic."""


class FitFailed(CatsimError):
    """Least-squares fit impossible on the given data (e.g. non-decaying V)."""


class NonPositiveInput(CatsimError):
    """Quantity that must be positive was zero or negative."""


class ConfigInvalid(CatsimError):
    """Configuration file or option set rejected during validation."""


class IOFailure(CatsimError):
    """Filesystem write failed while emitting results."""
