"""Exceptions shared across modules."""


class ResourceGuard(MemoryError):
    """An exact enumeration or table would exceed its configured size cap."""


class RegimeError(ValueError):
    """Parameters fall outside the regime where an experiment is meaningful."""


class ConfigError(ValueError):
    pass
