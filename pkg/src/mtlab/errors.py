"""Shared error types for configuration and construction failures."""


class ConfigError(ValueError):
    """Invalid experiment or instance configuration."""


class ConstructionError(RuntimeError):
    """A randomized construction stalled before reaching its target."""


class PackingError(RuntimeError):
    """Too many points requested for the ball at the required separation."""
