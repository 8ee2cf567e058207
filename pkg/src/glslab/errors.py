"""Exception hierarchy for the laboratory.

Every error raised on purpose derives from :class:`LabError`, so callers
(CLI included) can distinguish numerical refusals from genuine bugs.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for all deliberate failures."""


class CapacityError(LabError):
    """A requested grid or dimension exceeds the supported envelope."""


class IntegrationError(LabError):
    """A quadrature evaluation produced non-finite values."""


class PositivityError(LabError):
    """An operation that divides by the function met a non-positive value."""


class NormalizationError(LabError):
    """An operation requiring unit L2 norm received something else."""


class ConstraintError(LabError):
    """A verifier precondition that amounts to a refusal, not a skip."""


class DomainError(LabError):
    """A closed-form bound was evaluated outside its domain of validity."""


class FlowError(LabError):
    """The evolved diagnostics violate a structural requirement."""
