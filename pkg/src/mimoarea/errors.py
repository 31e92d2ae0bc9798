"""Exception types raised across the package."""


class MimoAreaError(Exception):
    """Base class for all package-specific errors."""


# -- synthesis --------------------------------------------------------------

class ZeroDistance(MimoAreaError):
    """A grid position coincides with an antenna position."""


class InvalidParams(MimoAreaError):
    """Synthesis parameters violate their preconditions."""


class ShapeMismatch(MimoAreaError):
    """Two channel maps do not share grid geometry or antenna count."""


# -- file formats -----------------------------------------------------------

class IoError(MimoAreaError):
    """Underlying file operation failed."""


class SerializationError(MimoAreaError):
    """Value cannot be represented in the target format."""


class FormatError(MimoAreaError):
    """File contents violate the documented format."""


# -- region detection -------------------------------------------------------

class NumericalFailure(MimoAreaError):
    """A matrix decomposition did not converge."""


class SeedClaimed(MimoAreaError):
    """Spiral seed cell is already claimed by another region."""


class OutOfBounds(MimoAreaError):
    """Cell or position lies outside the grid."""


class InsufficientUnclaimedCells(MimoAreaError):
    """Not enough unclaimed cells remain to draw a new seed."""


# -- clustering -------------------------------------------------------------

class KTooLarge(MimoAreaError):
    """Requested more clusters than there are positions."""


class EmptyInput(MimoAreaError):
    """Operation received an empty position set."""


# -- rate evaluation --------------------------------------------------------

class SingleClusterSIR(MimoAreaError):
    """SIR is undefined for a single cluster (empty interference sum)."""


class EmptyCluster(MimoAreaError):
    """Percentile requested over a cluster with no members."""


# -- configuration ----------------------------------------------------------

class ConfigError(MimoAreaError):
    """Experiment configuration is malformed or inconsistent."""
