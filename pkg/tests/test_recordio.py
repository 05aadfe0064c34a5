import csv
import json

import pytest

from matprod.recordio import (
    ResultRecord,
    RunManifest,
    Stat,
    manifest_timestamp,
    read_jsonl,
    write_records,
)


def make_records():
    return [
        ResultRecord(
            experiment="demo",
            d=2,
            field="real",
            ensemble="ginibre",
            n=10,
            replications=100,
            seq=1,
            stats={
                "lambda_1": Stat(0.1 + 1e-17, 0.01, 100),
                "note": Stat(3.0),
            },
        ),
        ResultRecord(
            experiment="demo",
            d=2,
            field="real",
            ensemble="ginibre",
            n=20,
            replications=100,
            seq=2,
            stats={"lambda_1": Stat(-0.5, 0.02, 100), "extra": Stat(7.0, 0.5)},
        ),
    ]


def make_manifest():
    return RunManifest(
        tool="matprod test",
        seed=5,
        config_text="seed=5\n",
        started_utc="2026-01-01T00:00:00Z",
    )


def test_jsonl_round_trip(tmp_path):
    path = str(tmp_path / "out.jsonl")
    records = make_records()
    write_records(records, "jsonl", path, make_manifest())
    manifest, rows = read_jsonl(path)
    assert manifest["tool"] == "matprod test"
    assert manifest["seed"] == 5
    assert len(rows) == 2
    assert rows[0]["stats"]["lambda_1"]["value"] == records[0].stats["lambda_1"].value
    assert rows[0]["stats"]["lambda_1"]["se"] == 0.01
    assert rows[1]["seq"] == 2


def test_jsonl_manifest_is_first_line(tmp_path):
    path = str(tmp_path / "out.jsonl")
    write_records(make_records(), "jsonl", path, make_manifest())
    first = json.loads(open(path).readline())
    assert first.get("manifest") is True


def test_empty_record_list(tmp_path):
    jpath = str(tmp_path / "empty.jsonl")
    write_records([], "jsonl", jpath, make_manifest())
    manifest, rows = read_jsonl(jpath)
    assert rows == []
    cpath = str(tmp_path / "empty.csv")
    write_records([], "csv", cpath, make_manifest())
    lines = open(cpath).read().splitlines()
    assert len(lines) == 1  # header only
    assert lines[0].startswith("experiment,")


def test_csv_columns_and_precision(tmp_path):
    path = str(tmp_path / "out.csv")
    write_records(make_records(), "csv", path, make_manifest())
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert "se_lambda_1" in rows[0]
    assert "count_lambda_1" in rows[0]
    assert "se_extra" in rows[0]
    # superset schema: stat missing from a record leaves an empty cell
    assert rows[0]["extra"] == ""
    assert rows[1]["note"] == ""
    # 17 significant digits round-trip the double exactly
    assert float(rows[0]["lambda_1"]) == 0.1 + 1e-17
    manifest = json.load(open(path + ".manifest.json"))
    assert manifest["seed"] == 5


def test_csv_uses_crlf_rows(tmp_path):
    path = str(tmp_path / "out.csv")
    write_records(make_records(), "csv", path, make_manifest())
    raw = open(path, "rb").read()
    assert b"\r\n" in raw


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_records([], "parquet", str(tmp_path / "x"), make_manifest())


def test_read_jsonl_requires_manifest(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"experiment": "x"}\n')
    with pytest.raises(ValueError):
        read_jsonl(str(path))


def test_manifest_timestamp_honors_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert manifest_timestamp() == "1970-01-01T00:00:00Z"
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    assert manifest_timestamp() == "1970-01-02T00:00:00Z"
    monkeypatch.delenv("SOURCE_DATE_EPOCH")
    stamp = manifest_timestamp()
    assert stamp.endswith("Z") and len(stamp) == 20
