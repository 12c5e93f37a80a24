"""Exception types shared across the package."""


class InputError(Exception):
    """Malformed or invalid external input: files, CLI arguments, specs."""


class UsageError(Exception):
    """A public operation was called outside its documented preconditions."""


class InternalInvariantError(Exception):
    """An internal invariant failed; indicates a bug, not bad input."""
