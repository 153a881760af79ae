"""
Exception hierarchy shared by all PPF-QSNN modules
"""
from typing import Optional


class PPFError(Exception):
    """Base class for every error raised by this package"""


class ConfigurationError(PPFError, ValueError):
    """A configuration value is out of its allowed range"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ShapeError(PPFError, ValueError):
    """Array dimensions do not line up"""


class QubitIndexError(PPFError, IndexError):
    """A gate or measurement refers to a qubit outside the register"""


class InvalidInputError(PPFError, ValueError):
    """Input values violate a documented precondition"""


class IdxFormatError(PPFError, ValueError):
    """An IDX file is malformed; ``offset`` is the byte where parsing failed"""

    def __init__(self, path: str, offset: int, message: str):
        self.path = path
        self.offset = offset
        super().__init__(f"{path} @ byte {offset}: {message}")


class FetchError(PPFError, RuntimeError):
    """Download or checksum verification failed"""


class TrainingDivergedError(PPFError, RuntimeError):
    """Loss became NaN or infinite during training"""

    def __init__(self, epoch: int, batch: int, loss: float, lr: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"loss is {loss} at epoch {epoch}, batch {batch}; "
            f"learning rate {lr} is probably too high"
        )


class MissingCacheError(PPFError, RuntimeError):
    """Backward pass was handed an incomplete forward cache"""

    def __init__(self, missing: Optional[str] = None):
        super().__init__(f"forward cache is missing {missing or 'entries'}")
