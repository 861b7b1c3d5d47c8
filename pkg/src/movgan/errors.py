from __future__ import annotations

import re


class ConfigurationError(ValueError):
    """Inconsistent configuration: dimension mismatches, unreadable config files"""


class InputError(ValueError):
    """Caller-supplied value out of the accepted domain"""


class LayoutValidationError(InputError):
    """Layout or bounding box violating its invariants"""


class InsufficientFramesError(InputError):
    """Annotation record without enough consecutive valid frames for a clip"""


class CheckpointError(ValueError):
    """Checkpoint with unexpected format version, shape or dtype"""


class AnnotationParseError(ValueError):
    """Malformed annotation record

    Carries the offending `video_id` and `field` so the message can point at it"""

    def __init__(self, video_id: str, field: str, reason: str):
        self.video_id = video_id
        self.field = field
        self.reason = reason
        super().__init__(f"video `{video_id}`: field `{field}`: {reason}")


class NonFiniteLossError(RuntimeError):
    """A loss became NaN or infinite during training"""

    def __init__(self, step: int, loss_name: str, batch_seed: int, value: float):
        self.step = step
        self.loss_name = loss_name
        self.batch_seed = batch_seed
        self.value = value
        super().__init__(
            f"non-finite {loss_name}={value} at step {step} (batch seed {batch_seed})"
        )


def error_category(exc: BaseException) -> str:
    """kebab-case category name of an exception, for one-line CLI reports"""
    return re.sub(r"(?<!^)(?=[A-Z])", "-", type(exc).__name__).lower()
