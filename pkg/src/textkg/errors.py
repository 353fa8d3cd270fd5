"""Exception types shared across the package."""


class TextKGError(Exception):
    """Base class for all package-specific errors."""


class RecordValidationError(TextKGError):
    """A record violates its own invariants (empty label, bad field value...)."""


class ReferentialIntegrityError(TextKGError):
    """A triplet references an entity or predicate id that is not in the graph."""


class TokenBudgetError(TextKGError):
    """A completion request would exceed the backend token limit."""


class UnscriptedPromptError(TextKGError):
    """The fixture backend has no scripted response for a request digest."""


class TransportError(TextKGError):
    """The remote backend failed after exhausting its retry policy."""


class AnnotationConflictError(TextKGError):
    """One assessor recorded contradictory verdicts for the same target."""


class StageError(TextKGError):
    """A pipeline stage failed; earlier stage artifacts are left intact."""
