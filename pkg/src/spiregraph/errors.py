"""Exception types shared across the package."""


class NumericalContractError(RuntimeError):
    """A solver residual, root residual or size cap was violated."""


class CapacityError(NumericalContractError):
    """A dense construction would exceed its configured size cap."""
