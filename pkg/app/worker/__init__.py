"""Module-level task functions run in worker processes."""
from .norms import CurrencyNorms, currency_norms

__all__ = ["CurrencyNorms", "currency_norms"]
