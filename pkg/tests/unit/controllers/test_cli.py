import hashlib
from collections import abc
from pathlib import Path

import pandas as pd
import pytest

from app.controllers.norms import load_diffs
from app.lib.config import load_config
from app.lib.dependencies import provide_context
from app.lib.exceptions import ExitCode
from app.lib.manifest import RunManifest

CLI = abc.Callable[..., int]


@pytest.fixture()
def out_dir(tmp_path: Path) -> Path:
    return tmp_path / "out"


def _write_config(path: Path, prices: Path, out_dir: Path, *extra: str) -> Path:
    lines = [
        f"TDA_DATA__PATH={prices}",
        "TDA_EMBEDDING__D=2",
        "TDA_EMBEDDING__W=20",
        "TDA_RFM__LOOKBACK=10",
        "TDA_BACKTEST__START=2018-02-01",
        "TDA_BACKTEST__END=2018-04-30",
        "TDA_MARKET__REPORT_SYMBOL=TRND",
        "TDA_MARKET__VOLATILITY_WINDOW=10",
        "TDA_MARKET__SHARPE_WINDOW=20",
        f"TDA_OUTPUT__DIRECTORY={out_dir}",
        *extra,
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def config_file(tmp_path: Path, prices_csv: Path, out_dir: Path) -> Path:
    return _write_config(tmp_path / "run.env", prices_csv, out_dir)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _csv_checksums(directory: Path) -> dict[str, str]:
    return {str(path.relative_to(directory)): _sha256(path) for path in sorted(directory.rglob("*.csv"))}


def _run_all(cli: CLI, config_file: Path, *flags: str) -> None:
    for command in ("ingest", "norms", "score", "backtest", "report"):
        assert cli([command, "--config", str(config_file), *flags]) == ExitCode.OK, command


def test_ingest(
    cli: CLI, config_file: Path, out_dir: Path, prices_csv: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.OK
    assert "4 currencies, 375 observations, 0 rejected rows" in capsys.readouterr().out
    universe = pd.read_csv(out_dir / "universe.csv")
    assert list(universe.columns) == ["symbol", "date", "close"]
    assert len(universe) == 375
    manifest = RunManifest.read(out_dir / "manifest_ingest.json")
    assert manifest["dataset_checksum"] == _sha256(prices_csv)
    assert manifest["artifacts"]["universe"] == _sha256(out_dir / "universe.csv")
    assert manifest["config"]["embedding"]["w"] == 20


def test_norms_skip_short_currencies(cli: CLI, config_file: Path, out_dir: Path) -> None:
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.OK
    assert cli(["norms", "--config", str(config_file)]) == ExitCode.OK
    skipped = pd.read_csv(out_dir / "skipped.csv")
    assert skipped.to_dict("list") == {"symbol": ["SHRT"], "observations": [15], "required": [21]}
    norms = pd.read_csv(out_dir / "norms.csv")
    assert sorted(norms["symbol"].unique()) == ["FLAT", "TRND", "WAVE"]
    assert (norms["l2_norm"] >= 0).all()
    assert norms.groupby("symbol").size().tolist() == [100, 100, 100]
    diffs = pd.read_csv(out_dir / "diffs.csv")
    assert diffs.groupby("symbol").size().tolist() == [99, 99, 99]


def test_reruns_are_byte_identical(cli: CLI, config_file: Path, out_dir: Path) -> None:
    _run_all(cli, config_file)
    first = _csv_checksums(out_dir)
    assert {"universe.csv", "norms.csv", "scores.csv", "weights.csv", "returns.csv", "monthly.csv"} <= first.keys()
    assert "report/market.csv" in first
    _run_all(cli, config_file, "--jobs", "2")
    assert _csv_checksums(out_dir) == first
    manifest = RunManifest.read(out_dir / "manifest_backtest.json")
    assert manifest["artifacts"]["returns"] == first["returns.csv"]
    assert manifest["exit_code"] == 0
    assert set(RunManifest.read(out_dir / "manifest_norms.json")["timings"]) == {"norms"}


def test_replay_from_manifest(cli: CLI, config_file: Path, out_dir: Path, tmp_path: Path) -> None:
    _run_all(cli, config_file, "--mode", "normalized")
    replay = tmp_path / "replay"
    for command in ("ingest", "norms", "score", "backtest", "report"):
        manifest = out_dir / f"manifest_{command}.json"
        assert cli([command, "--from-manifest", str(manifest), "--out", str(replay)]) == ExitCode.OK, command
        replayed = RunManifest.read(replay / f"manifest_{command}.json")["config"]
        original = RunManifest.read(manifest)["config"]
        assert replayed["allocation"]["mode"] == "normalized"
        assert {**replayed, "output": None} == {**original, "output": None}
    assert _csv_checksums(replay) == _csv_checksums(out_dir)


def test_replay_needs_a_manifest(cli: CLI, config_file: Path, tmp_path: Path) -> None:
    assert cli(["ingest", "--from-manifest", str(tmp_path / "nope.json")]) == ExitCode.CONFIG
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2]", encoding="utf-8")
    assert cli(["ingest", "--from-manifest", str(broken)]) == ExitCode.CONFIG
    with pytest.raises(SystemExit):
        cli(["ingest", "--config", str(config_file), "--from-manifest", str(broken)])


def test_full_pipeline(cli: CLI, config_file: Path, out_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _run_all(cli, config_file)
    output = capsys.readouterr().out
    assert "TDA cumulative log return" in output
    assert "of 3" in output

    scores = pd.read_csv(out_dir / "scores.csv")
    assert list(scores.columns) == ["date", "symbol", "recency", "frequency", "monetary", "r_z", "f_z", "m_z", "score"]
    assert scores["score"].between(0, 3).all()
    assert "SHRT" not in set(scores["symbol"])

    returns = pd.read_csv(out_dir / "returns.csv", parse_dates=["date"])
    assert returns.groupby("strategy").size().to_dict() == {"naive": 89, "tda": 89}
    assert (returns.groupby("strategy")["daily_log_return"].first() == 0.0).all()
    monthly = pd.read_csv(out_dir / "monthly.csv")
    assert monthly["month"].tolist() == ["2018-02", "2018-03", "2018-04"]
    naive = returns[returns["strategy"] == "naive"]
    assert monthly["naive"].sum() == pytest.approx(100 * naive["daily_log_return"].sum())

    weights = pd.read_csv(out_dir / "weights.csv")
    assert "equal_weight" in set(weights["mode"])
    assert set(weights["mode"]) <= {"paper_literal", "equal_weight"}
    naive_weights = weights[weights["mode"] == "equal_weight"]
    assert naive_weights.groupby("date")["weight"].sum().to_numpy() == pytest.approx(1.0)

    for name in ("market", "symbol_TRND", "norms_TRND"):
        assert (out_dir / "report" / f"{name}.csv").is_file()
    for command in ("ingest", "norms", "score", "backtest", "report"):
        assert (out_dir / f"manifest_{command}.json").is_file()
    assert "report/market" in RunManifest.read(out_dir / "manifest_report.json")["artifacts"]


def test_flags_override_config(cli: CLI, config_file: Path, out_dir: Path, tmp_path: Path) -> None:
    elsewhere = tmp_path / "elsewhere"
    assert cli(["ingest", "--config", str(config_file), "--out", str(elsewhere), "--subset", "2"]) == ExitCode.OK
    assert cli(["norms", "--config", str(config_file), "--out", str(elsewhere), "--subset", "2"]) == ExitCode.OK
    assert not out_dir.exists()
    assert sorted(pd.read_csv(elsewhere / "norms.csv")["symbol"].unique()) == ["FLAT", "TRND"]
    args = ["score", "--config", str(config_file), "--out", str(elsewhere), "--mode", "normalized"]
    assert cli([*args, "--recency", "literal", "--from", "2018-03-01", "--to", "2018-03-10"]) == ExitCode.OK
    manifest = RunManifest.read(elsewhere / "manifest_score.json")
    assert manifest["config"]["allocation"]["mode"] == "normalized"
    assert manifest["config"]["rfm"]["recency_mode"] == "literal"
    assert manifest["config"]["data"]["subset"] == 2
    weights = pd.read_csv(elsewhere / "weights.csv")
    assert set(weights["mode"]) <= {"normalized"}
    assert pd.read_csv(elsewhere / "scores.csv")["date"].nunique() == 10


def test_missing_price_file(cli: CLI, tmp_path: Path, out_dir: Path) -> None:
    path = tmp_path / "missing.env"
    path.write_text(f"TDA_DATA__PATH={tmp_path / 'nope.csv'}\nTDA_OUTPUT__DIRECTORY={out_dir}\n", encoding="utf-8")
    assert cli(["ingest", "--config", str(path)]) == ExitCode.DATA
    manifest = RunManifest.read(out_dir / "manifest_ingest.json")
    assert manifest["exit_code"] == ExitCode.DATA
    assert manifest["artifacts"] == {}
    assert manifest["config"]["data"]["path"] == str(tmp_path / "nope.csv")


def test_no_data_source(cli: CLI, tmp_path: Path, out_dir: Path) -> None:
    path = tmp_path / "nosource.env"
    path.write_text(f"TDA_OUTPUT__DIRECTORY={out_dir}\n", encoding="utf-8")
    assert cli(["ingest", "--config", str(path)]) == ExitCode.CONFIG


@pytest.mark.parametrize("line", ["TDA_EMBEDDING__D=1", "TDA_RFM__RECENCY_MODE=sideways", "TDA_TYPO=1"])
def test_invalid_config(cli: CLI, config_file: Path, line: str) -> None:
    with config_file.open("a", encoding="utf-8") as fh:
        fh.write(f"{line}\n")
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.CONFIG


def test_missing_config_file(cli: CLI, tmp_path: Path) -> None:
    assert cli(["ingest", "--config", str(tmp_path / "nope.env")]) == ExitCode.CONFIG


def test_stage_before_its_input(cli: CLI, config_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert cli(["norms", "--config", str(config_file)]) == ExitCode.DATA
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.OK
    assert cli(["backtest", "--config", str(config_file)]) == ExitCode.DATA
    assert "crypto-tda norms" in capsys.readouterr().err


def test_backtest_range_outside_data(cli: CLI, config_file: Path) -> None:
    _run_all(cli, config_file)
    assert cli(["backtest", "--config", str(config_file), "--from", "2017-12-17"]) == ExitCode.DATA


def test_unknown_command(cli: CLI) -> None:
    with pytest.raises(SystemExit):
        cli(["plot"])


def test_subset_restricts_cached_norms(cli: CLI, config_file: Path, out_dir: Path) -> None:
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.OK
    assert cli(["norms", "--config", str(config_file)]) == ExitCode.OK
    assert cli(["score", "--config", str(config_file), "--subset", "2"]) == ExitCode.OK
    assert set(pd.read_csv(out_dir / "scores.csv")["symbol"]) == {"FLAT", "TRND"}
    assert set(pd.read_csv(out_dir / "weights.csv")["symbol"]) <= {"FLAT", "TRND"}


def test_cached_diffs_are_cut_at_the_last_day(cli: CLI, config_file: Path) -> None:
    assert cli(["ingest", "--config", str(config_file)]) == ExitCode.OK
    assert cli(["norms", "--config", str(config_file)]) == ExitCode.OK
    context = provide_context("score", load_config(config_file))
    diffs = load_diffs(context, ["TRND", "WAVE"], pd.Timestamp("2018-03-01"))
    assert [item.symbol for item in diffs] == ["TRND", "WAVE"]
    assert all(item.diffs.index.max() == pd.Timestamp("2018-03-01") for item in diffs)
    assert len(load_diffs(context)) == 3


def test_stale_diagram_dump_is_removed(
    cli: CLI, config_file: Path, prices_csv: Path, tmp_path: Path, out_dir: Path
) -> None:
    dumping = _write_config(tmp_path / "dump.env", prices_csv, out_dir, "TDA_PERSISTENCE__DUMP_DIAGRAMS=true")
    assert cli(["ingest", "--config", str(dumping)]) == ExitCode.OK
    assert cli(["norms", "--config", str(dumping)]) == ExitCode.OK
    diagrams = pd.read_csv(out_dir / "diagrams.csv")
    assert set(diagrams["symbol"]) == {"FLAT", "TRND", "WAVE"}
    assert cli(["norms", "--config", str(config_file)]) == ExitCode.OK
    assert not (out_dir / "diagrams.csv").exists()
    assert "diagrams" not in RunManifest.read(out_dir / "manifest_norms.json")["artifacts"]


def test_failed_stage_writes_manifest_with_exit_code(cli: CLI, config_file: Path, out_dir: Path) -> None:
    _run_all(cli, config_file)
    assert cli(["backtest", "--config", str(config_file), "--from", "2017-12-17"]) == ExitCode.DATA
    manifest = RunManifest.read(out_dir / "manifest_backtest.json")
    assert manifest["exit_code"] == ExitCode.DATA
    assert manifest["config"]["backtest"]["start"] == "2017-12-17"
    assert "returns" not in manifest["artifacts"]


def test_growing_loops_draw_weight_above_equal_share(
    cli: CLI, momentum_csv: Path, tmp_path: Path, out_dir: Path
) -> None:
    config = _write_config(tmp_path / "momentum.env", momentum_csv, out_dir)
    for command in ("ingest", "norms", "backtest"):
        assert cli([command, "--config", str(config)]) == ExitCode.OK, command
    weights = pd.read_csv(out_dir / "weights.csv")
    tda = weights[weights["mode"] == "paper_literal"].pivot(index="date", columns="symbol", values="weight")
    relative = tda.fillna(0.0).div(tda.sum(axis=1), axis=0).mean()
    assert relative.idxmax() == "TRND"
    assert relative["TRND"] > 1 / 3
