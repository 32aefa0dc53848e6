import numpy as np
import pytest
from numpy.random import default_rng

from recipcal import CsvFormatError, intra_array_channel, rayleigh_channel
from recipcal.csvio import (
    CSV_VERSION,
    channel_from_csv,
    channel_to_csv,
    format_value,
    read_csv,
    write_csv,
)


def test_format_value_types():
    assert format_value(True) == "true"
    assert format_value(False) == "false"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1) == "0.1"
    assert format_value(1e-12) == "1e-12"
    assert format_value("x") == "x"


def test_write_read_roundtrip(tmp_path):
    path = str(tmp_path / "t.csv")
    write_csv(
        path,
        "test-kind",
        ["a", "b"],
        [(1, 2.5), (3, -0.25)],
        meta={"n": 2, "note": "hello"},
    )
    text = open(path).read()
    assert text.startswith(f"# {CSV_VERSION}\n")
    assert text.endswith("\n")
    table = read_csv(path, expected_kind="test-kind")
    assert table.meta["n"] == "2"
    assert table.columns == ["a", "b"]
    assert table.column("b") == ["2.5", "-0.25"]
    with pytest.raises(KeyError):
        table.column("missing")


def test_metadata_is_sorted_for_stable_bytes(tmp_path):
    p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    write_csv(p1, "k", ["x"], [(1,)], meta={"b": 1, "a": 2})
    write_csv(p2, "k", ["x"], [(1,)], meta={"a": 2, "b": 1})
    assert open(p1).read() == open(p2).read()


def test_missing_version_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(CsvFormatError) as excinfo:
        read_csv(str(path))
    assert excinfo.value.line == 1


def test_wrong_kind(tmp_path):
    path = str(tmp_path / "t.csv")
    write_csv(path, "alpha", ["x"], [(1,)])
    read_csv(path, expected_kind="alpha")
    with pytest.raises(CsvFormatError):
        read_csv(path, expected_kind="beta")


def test_ragged_row_reports_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(f"# {CSV_VERSION}\n# kind = k\na,b\n1,2\n3\n")
    with pytest.raises(CsvFormatError) as excinfo:
        read_csv(str(path))
    assert excinfo.value.line == 5
    assert "bad.csv" in str(excinfo.value)


def test_row_width_checked_on_write(tmp_path):
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "t.csv"), "k", ["a", "b"], [(1, 2, 3)])


# ---------------------------------------------------------------------------
# channel round trips
# ---------------------------------------------------------------------------

def test_channel_roundtrip_intra(tmp_path):
    path = str(tmp_path / "c.csv")
    chan = intra_array_channel(8, default_rng(1))
    channel_to_csv(chan, path)
    back = channel_from_csv(path)
    assert back.kind == "intra"
    np.testing.assert_array_equal(back.c, chan.c)  # repr round-trips exactly


def test_channel_roundtrip_air(tmp_path):
    path = str(tmp_path / "c.csv")
    chan = rayleigh_channel(3, 5, default_rng(2))
    channel_to_csv(chan, path)
    back = channel_from_csv(path)
    assert back.kind == "air"
    np.testing.assert_array_equal(back.c, chan.c)


def test_channel_csv_bad_number(tmp_path):
    path = str(tmp_path / "c.csv")
    channel_to_csv(intra_array_channel(4, default_rng(0)), path)
    lines = open(path).read().splitlines()
    idx = next(i for i, ln in enumerate(lines) if ln.startswith("0,1,"))
    cells = lines[idx].split(",")
    cells[2] = "not-a-number"
    lines[idx] = ",".join(cells)
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(CsvFormatError) as excinfo:
        channel_from_csv(path)
    assert "not-a-number" in str(excinfo.value)


def test_channel_csv_duplicate_entry(tmp_path):
    path = str(tmp_path / "c.csv")
    channel_to_csv(intra_array_channel(4, default_rng(0)), path)
    lines = open(path).read().splitlines()
    lines.append(lines[-1])  # repeat the last data row
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(CsvFormatError) as excinfo:
        channel_from_csv(path)
    assert "duplicate" in str(excinfo.value)


def test_channel_csv_missing_entry(tmp_path):
    path = str(tmp_path / "c.csv")
    channel_to_csv(intra_array_channel(4, default_rng(0)), path)
    lines = open(path).read().splitlines()
    open(path, "w").write("\n".join(lines[:-1]) + "\n")
    with pytest.raises(CsvFormatError) as excinfo:
        channel_from_csv(path)
    assert "missing" in str(excinfo.value)


def test_channel_csv_out_of_range_index(tmp_path):
    path = str(tmp_path / "c.csv")
    channel_to_csv(intra_array_channel(4, default_rng(0)), path)
    lines = open(path).read().splitlines()
    lines[-1] = "9,9,0.0,0.0"
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(CsvFormatError) as excinfo:
        channel_from_csv(path)
    assert "shape" in str(excinfo.value)
