"""Common exception types shared across taxbench modules."""


class TaxbenchError(Exception):
    """Base class for all taxbench errors."""


class NotFoundError(TaxbenchError, KeyError):
    """A referenced entity (column, concept, session, job...) does not exist."""

    def __str__(self) -> str:  # KeyError quotes its message; keep it plain
        return self.args[0] if self.args else ""


class ValidationError(TaxbenchError, ValueError):
    """An operation was given arguments that violate its preconditions."""


class ConflictError(TaxbenchError):
    """An operation collides with the current state (double resolution, busy writer)."""
