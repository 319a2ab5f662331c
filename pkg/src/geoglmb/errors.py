"""Exception types shared across the package."""


class GeoGlmbError(Exception):
    """Base class for all package-specific errors."""


class WeightCollapseError(GeoGlmbError):
    """Every hypothesis weight is zero (log-weight -inf); nothing to normalize."""


class InfeasibleAssociationError(GeoGlmbError):
    """No association map with finite score exists for a cost matrix."""


class SiteTableError(GeoGlmbError):
    """A site ground-truth table failed to parse or violates its schema."""


class ConfigError(GeoGlmbError):
    """An experiment configuration is invalid or internally inconsistent."""


class FilterDivergenceError(GeoGlmbError):
    """The filter lost all probability mass or produced non-finite state."""
