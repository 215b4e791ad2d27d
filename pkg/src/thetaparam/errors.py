"""Shared exception base so the CLI can map domain failures to exit code 1."""


class DomainError(Exception):
    """Base class for all arithmetic / validation errors raised by this package."""
