"""Exception types shared across the toolkit."""


class LrdnError(Exception):
    """Base class for all toolkit-specific failures."""


class SingularLeadingCoefficient(LrdnError):
    """The lag-0 coefficient of a filter is numerically singular."""


class NoDecay(LrdnError):
    """A truncated causal inverse did not decay at the working horizon.

    Carries the offending tail norm in ``tail``.
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class InvalidModel(LrdnError):
    """A model failed its standing-assumption checks."""


class GenerationFailed(LrdnError):
    """Rejection sampling exhausted its budget without a stable model."""


class SingularBlock(LrdnError):
    """A spectral block is too ill-conditioned to invert on the grid."""


class RankDeficientDesign(LrdnError):
    """The regression design is rank deficient and no ridge was requested."""


class AmbiguousRank(LrdnError):
    """Channel selection found no clear gap around the rank tolerance."""


class DegenerateRestriction(LrdnError):
    """The restricted design of a group test is rank deficient."""


class InsufficientData(LrdnError):
    """Too few samples for the requested estimation or selection task."""
