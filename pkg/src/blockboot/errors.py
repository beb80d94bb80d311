"""Exception types raised across the package."""


class BlockBootError(Exception):
    """Base class for package errors."""


class ConfigError(BlockBootError, ValueError):
    """Invalid or inconsistent configuration value."""


class InfeasibleParameterError(BlockBootError, ValueError):
    """A tuning rule or resampling setup cannot be realised at this sample size."""
