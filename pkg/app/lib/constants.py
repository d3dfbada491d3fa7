UNIVERSE = "universe"
"""Stage cache holding every accepted observation, `symbol,date,close`."""
REJECTIONS = "rejections"
"""Ingest rejection report, `row,reason`."""
NORMS = "norms"
"""Landscape norm series, `symbol,date,l2_norm`."""
DIFFS = "diffs"
"""Norm difference series, `symbol,date,diff_l2`."""
SKIPPED = "skipped"
"""Currencies too short for one embedding window, `symbol,observations,required`."""
DIAGRAMS = "diagrams"
"""Optional persistence diagram dump, `symbol,date,dim,birth,death`."""
SCORES = "scores"
WEIGHTS = "weights"
RETURNS = "returns"
MONTHLY = "monthly"
MANIFEST_PREFIX = "manifest_"
"""Run manifests are written as `manifest_<command>.json`."""
REPORT_DIR = "report"
"""Sub-directory of the output directory holding plot-ready CSVs."""

UNIVERSE_COLUMNS = ["symbol", "date", "close"]
REJECTION_COLUMNS = ["row", "reason"]
NORM_COLUMNS = ["symbol", "date", "l2_norm"]
DIFF_COLUMNS = ["symbol", "date", "diff_l2"]
SKIP_COLUMNS = ["symbol", "observations", "required"]
DIAGRAM_COLUMNS = ["symbol", "date", "dim", "birth", "death"]
SCORE_COLUMNS = ["date", "symbol", "recency", "frequency", "monetary", "r_z", "f_z", "m_z", "score"]
WEIGHT_COLUMNS = ["date", "symbol", "weight", "mode"]
RETURN_COLUMNS = ["date", "strategy", "daily_log_return", "cumulative_log_return", "cash_weight"]
MONTHLY_COLUMNS = ["month", "tda", "naive"]

TDA_STRATEGY = "tda"
NAIVE_STRATEGY = "naive"
