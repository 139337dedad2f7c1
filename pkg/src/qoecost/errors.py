"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of a model operation."""


class PricingFormatError(DomainError):
    """A pricing table could not be parsed or failed validation."""
