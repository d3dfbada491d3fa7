import logging
from pathlib import Path

from app.domain.market_data import CsvSchema, MarketUniverse, fetch_dataset, ingest_csv
from app.lib import constants
from app.lib.dependencies import Command, RunContext
from app.lib.exceptions import ConfigError
from app.lib.repository import file_checksum

__all__ = ["command", "ingest", "load_universe"]

logger = logging.getLogger(__name__)


def dataset_path(context: RunContext) -> Path:
    """Local price file, downloaded into the cache when only a URL is configured."""
    data = context.config.data
    if data.path is not None:
        return data.path
    if data.url is not None:
        return fetch_dataset(data.url, data.cache_dir)
    raise ConfigError("set data.path or data.url (TDA_DATA__PATH / TDA_DATA__URL)")


def load_universe(context: RunContext) -> MarketUniverse:
    """The ingested universe, restricted to `data.subset` currencies when set."""
    universe = MarketUniverse.from_frame(context.service.get(constants.UNIVERSE))
    subset = context.config.data.subset
    if subset is not None and subset < len(universe):
        logger.info("restricting %d currencies to the %d longest histories", len(universe), subset)
        universe = universe.subset(subset)
    return universe


def ingest(context: RunContext) -> None:
    """Validate the price file and cache the universe with its rejection report."""
    data = context.config.data
    path = dataset_path(context)
    with context.manifest.stage("ingest"):
        universe = ingest_csv(path, CsvSchema(data.date_column, data.symbol_column, data.close_column))
        context.manifest.dataset_checksum = file_checksum(path)
        context.store(constants.UNIVERSE, universe.to_frame())
        context.store(constants.REJECTIONS, universe.rejections[constants.REJECTION_COLUMNS])
    print(f"{len(universe)} currencies, {universe.observations} observations, {len(universe.rejections)} rejected rows")


command = Command("ingest", "Validate the price file and cache the universe.", ingest)
