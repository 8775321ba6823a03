"""Exception types raised across fidlab."""


class FidlabError(Exception):
    """Base class for all fidlab errors."""


class ValidationError(FidlabError, ValueError):
    """Input failed a structural or numerical precondition."""


class AlgebraMismatch(ValidationError):
    """Operands live in different tracial algebras."""


class NotSelfadjoint(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class NotNormalized(ValidationError):
    """A would-be density element does not have unit trace."""


class ParseError(ValidationError):
    pass


class LevelMismatch(ValidationError):
    """Element does not belong to the requested CAR truncation level."""


class MultiBlockUnsupported(ValidationError):
    """Operation needs a single matrix block; use the per-block API instead."""


class NonConvergence(FidlabError):
    """Optimizer exhausted its iteration budget with a large gradient."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotFidelityPreserving(FidlabError):
    """A sampled pair showed a change in fidelity."""


class NotUnitaryImplementable(FidlabError):
    """Reconstructed unitary does not reproduce the channel."""
