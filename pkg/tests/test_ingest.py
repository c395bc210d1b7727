import json

import pytest
from hypothesis import given, strategies as st

from purfit.errors import IngestionError
from purfit.ingest import IngestConfig, ingest, shipped_config
from conftest import ADULT_CSV

T1_CONFIG = {
    "response": {"name": "y", "column": "label",
                 "rule": {"type": "categorical", "categories": ["0", "1"]}},
    "protected": [{"name": "s", "column": "group",
                   "rule": {"type": "map", "map": {"a": ["A", "alpha"], "b": ["B"]}}}],
    "unprotected": [{"name": "x", "column": "score",
                     "rule": {"type": "bins", "edges": [None, 5, None], "labels": ["u", "v"]}}],
}


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_three_row_tally(tmp_path):
    path = write(tmp_path, "label,group,score\n1,A,2\n0,B,7\n1,alpha,3\n")
    counts, report = ingest(path, IngestConfig.from_dict(T1_CONFIG))
    schema = counts.schema
    assert counts.total == 3 == report.accepted
    assert counts.counts[schema.index_of(("1", "a", "u"))] == 2
    assert counts.counts[schema.index_of(("0", "b", "v"))] == 1
    assert report.category_counts["s"] == {"a": 2, "b": 1}


def test_bins_are_half_open(tmp_path):
    path = write(tmp_path, "label,group,score\n0,A,4.999\n0,A,5\n0,A,-100\n0,A,1e6\n")
    counts, _ = ingest(path, IngestConfig.from_dict(T1_CONFIG))
    t = counts.tensor
    assert t[0, 0, 0] == 2 and t[0, 0, 1] == 2


def test_missing_values_rejected_or_fatal(tmp_path):
    path = write(tmp_path, "label,group,score\n1,A,2\n0,?,7\n1,A,\n")
    counts, report = ingest(path, IngestConfig.from_dict(T1_CONFIG))
    assert counts.total == 1 and report.rejected_missing == 2 and report.records_read == 3
    strict = IngestConfig.from_dict({**T1_CONFIG, "on_missing": "error"})
    with pytest.raises(IngestionError, match="line 3"):
        ingest(path, strict)


def test_unmapped_values(tmp_path):
    path = write(tmp_path, "label,group,score\n1,A,2\n1,C,2\n")
    with pytest.raises(IngestionError, match=r"line 3.*'C'"):
        ingest(path, IngestConfig.from_dict(T1_CONFIG))
    lenient = IngestConfig.from_dict({**T1_CONFIG, "on_unmapped": "reject"})
    counts, report = ingest(path, lenient)
    assert counts.total == 1 and report.rejected_unmapped == 1


def test_non_numeric_bin_value_is_unmapped(tmp_path):
    path = write(tmp_path, "label,group,score\n1,A,high\n")
    with pytest.raises(IngestionError, match="score"):
        ingest(path, IngestConfig.from_dict(T1_CONFIG))


def test_header_and_empty_errors(tmp_path):
    cfg = IngestConfig.from_dict(T1_CONFIG)
    with pytest.raises(IngestionError, match="not in header"):
        ingest(write(tmp_path, "label,grp,score\n1,A,2\n"), cfg)
    with pytest.raises(IngestionError, match="no record"):
        ingest(write(tmp_path, "label,group,score\n1,?,2\n"), cfg)
    with pytest.raises(IngestionError):
        ingest(write(tmp_path, ""), cfg)
    with pytest.raises(FileNotFoundError):
        ingest(tmp_path / "missing.csv", cfg)


def test_filters(tmp_path):
    path = write(tmp_path, "year,label,group,score\n1981,1,A,2\n1990,0,B,7\n1981,0,B,9\n")
    cfg = IngestConfig.from_dict(T1_CONFIG).with_filters(year=["1981"])
    counts, report = ingest(path, cfg)
    assert counts.total == 2 and report.filtered_out == 1


@pytest.mark.parametrize("patch", [
    {"on_missing": "ignore"},
    {"protected": [{"name": "s", "column": "label",
                    "rule": {"type": "categorical", "categories": ["a", "b"]}}]},
    {"unprotected": [{"name": "x", "column": "score",
                      "rule": {"type": "bins", "edges": [0, 5, 3], "labels": ["u", "v"]}}]},
    {"unprotected": [{"name": "x", "column": "score",
                      "rule": {"type": "bins", "edges": [0, 5], "labels": ["u", "v"]}}]},
    {"protected": [{"name": "s", "column": "group",
                    "rule": {"type": "map", "map": {"a": ["A"], "b": ["A"]}}}]},
    {"protected": [{"name": "s", "column": "group", "rule": {"type": "regex"}}]},
    {"response": {"name": "y"}},
])
def test_invalid_configs(patch):
    with pytest.raises(IngestionError):
        IngestConfig.from_dict({**T1_CONFIG, **patch})


@given(st.lists(st.tuples(st.sampled_from("01"), st.sampled_from(["A", "B", "alpha", "?"]),
                          st.floats(-50, 50, allow_nan=False)), min_size=1, max_size=40))
def test_ingestion_is_lossless_modulo_binning(rows):
    import pandas as pd
    from purfit.ingest import ingest_frame

    df = pd.DataFrame([(y, g, repr(v)) for y, g, v in rows], columns=["label", "group", "score"])
    cfg = IngestConfig.from_dict(T1_CONFIG)
    keep = [r for r in rows if r[1] != "?"]
    if not keep:
        with pytest.raises(IngestionError):
            ingest_frame(df, cfg)
        return
    counts, report = ingest_frame(df, cfg)
    assert counts.total == report.accepted == len(keep)
    assert report.accepted + report.rejected == len(rows)
    low = sum(1 for r in keep if r[2] < 5)
    assert counts.tensor[:, :, 0].sum() == low


def test_config_digest_is_stable():
    a = IngestConfig.from_dict(T1_CONFIG)
    b = IngestConfig.from_dict(json.loads(json.dumps(T1_CONFIG)))
    assert a.digest() == b.digest()
    assert a.digest() != a.with_filters(year=["1"]).digest()


def test_shipped_configs_load():
    adult = IngestConfig.load(shipped_config("adult"))
    assert adult.schema().shape == (2, 2, 2, 3, 3, 3)
    paygap = IngestConfig.load(shipped_config("paygap"))
    assert paygap.schema().size == 3150
    with pytest.raises(FileNotFoundError):
        shipped_config("census")


@pytest.mark.skipif(not ADULT_CSV.exists(), reason="adult CSV not present")
def test_adult_record_count():
    counts, report = ingest(ADULT_CSV, IngestConfig.load(shipped_config("adult")))
    assert counts.total == 46_043
    assert report.records_read == 48_842
    assert report.rejected_unmapped == 0
