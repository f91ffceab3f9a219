"""Exception types shared across the toolkit."""


class SkybridgeError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfig(SkybridgeError):
    """Configuration rejected; carries the offending field path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownLinkClass(SkybridgeError):
    """Node pair outside the supported topology."""


class AccessPairNotAllowed(SkybridgeError):
    """FSO requested on an access-class (user-facing) pair."""


class InfeasibleCap(SkybridgeError):
    """Back-haul parent capacity cannot host all HAPs."""


class InstanceTooLarge(SkybridgeError):
    """Exhaustive solver guard tripped."""


class CausalityViolation(SkybridgeError):
    """TB asked to consume more energy than stored in the prior slot."""

    def __init__(self, slot, consumed, stored):
        self.slot = slot
        self.consumed = consumed
        self.stored = stored
        super().__init__(
            f"slot {slot}: consumed {consumed:.3f} J exceeds stored {stored:.3f} J"
        )


class NoMovableStations(SkybridgeError):
    """Placement invoked with an empty movable set."""


class TooManyStations(SkybridgeError):
    """Grid-search oracle guard: too many jointly-moved stations."""


class PitchTooFine(SkybridgeError):
    """Grid-search oracle guard: lattice exceeds the evaluation budget."""


class IoFailure(SkybridgeError):
    """Could not write an output artifact."""
