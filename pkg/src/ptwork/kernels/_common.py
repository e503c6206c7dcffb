"""Shared kernel error types."""


class BondCapExceeded(RuntimeError):
    """A truncation kept more singular values than the configured cap."""

    def __init__(self, bond_index: int, requested: int, cap: int):
        super().__init__(
            f"bond {bond_index} needs dimension {requested} above the cap {cap}"
        )
        self.bond_index = bond_index
        self.requested = requested
        self.cap = cap
