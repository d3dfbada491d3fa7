from . import backtest, embedding, landscape, market_data, persistence, reports, scoring

__all__ = ["backtest", "embedding", "landscape", "market_data", "persistence", "reports", "scoring"]
