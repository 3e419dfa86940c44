"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` so the CLI can emit
it as JSON without string matching.
"""


class ChannelError(ValueError):
    code = "channel-error"


class InvalidDimensionError(ChannelError):
    code = "invalid-dimension"


class DimensionMismatchError(ChannelError):
    code = "dimension-mismatch"


class NotAStateError(ChannelError):
    code = "not-a-state"


class NotCompletelyPositiveError(ChannelError):
    code = "not-completely-positive"


class InvalidChannelError(ChannelError):
    code = "invalid-channel"


class OrderDegenerateError(ChannelError):
    code = "order-degenerate"


class NotARootError(ChannelError):
    code = "not-a-root"


class RetryWithSmallerDeltaError(ChannelError):
    code = "retry-with-smaller-delta"


class ConstructionFailedError(ChannelError):
    code = "construction-failed"


class BasisError(ChannelError):
    code = "invalid-basis"


class SizeCapExceededError(ChannelError):
    code = "size-cap-exceeded"
