"""Exceptions shared by every bbqlab package."""


class BbqError(ValueError):
    """A contract violation: bad step, bad size, bad config value."""


class ConfigError(BbqError):
    pass


class UsageError(BbqError):
    """Bad command-line input. The CLI turns this into exit code 1."""
