from enum import Enum


class Transform(str, Enum):
    """Scalar series fed to the delay embedding."""

    log_price = "log_price"
    raw_price = "raw_price"
    log_return = "log_return"


class ThresholdPolicy(str, Enum):
    enclosing = "enclosing"
    fixed = "fixed"


class RecencyMode(str, Enum):
    literal = "literal"
    inverted = "inverted"


class FrequencyVariant(str, Enum):
    count = "count"
    magnitude = "magnitude"


class AllocationMode(str, Enum):
    paper_literal = "paper_literal"
    normalized = "normalized"
    capped = "capped"
    equal_weight = "equal_weight"


class RebalanceFrequency(str, Enum):
    daily = "daily"
    weekly = "weekly"
    monthly = "monthly"
