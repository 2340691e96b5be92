import numpy as np
import pytest

from gasplots.io import CsvFormatError, load_positions, meta_vector, read_table

GOOD = """# layout_version=1
# d=2
# n=2
# c=1.0
# v=1.0,0.0
step,particle,coord0,coord1
100,0,0.25,-0.5
100,1,0.75,0.5
"""


def test_reads_meta_and_rows(tmp_path):
    path = tmp_path / "positions.csv"
    path.write_text(GOOD)
    table, cloud = load_positions(path)
    assert table.meta["d"] == "2"
    assert np.array_equal(meta_vector(table.meta, "v"), [1.0, 0.0])
    assert cloud.shape == (2, 2)
    assert cloud[0, 0] == 0.25


def test_missing_file_is_a_format_error(tmp_path):
    with pytest.raises(CsvFormatError, match="no such"):
        read_table(tmp_path / "absent.csv")


def test_empty_data_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("# layout_version=1\nstep,particle,coord0\n")
    with pytest.raises(CsvFormatError, match="no data rows"):
        read_table(path)


def test_wrong_layout_version_rejected(tmp_path):
    path = tmp_path / "old.csv"
    path.write_text("# layout_version=0\na,b\n1,2\n")
    with pytest.raises(CsvFormatError, match="layout_version"):
        read_table(path)


def test_garbled_row_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# layout_version=1\na,b\n1,spaghetti\n")
    with pytest.raises(CsvFormatError, match="garbled"):
        read_table(path)


def test_missing_column_rejected(tmp_path):
    path = tmp_path / "cols.csv"
    path.write_text("# layout_version=1\na,b\n1,2\n")
    with pytest.raises(CsvFormatError, match="required column"):
        read_table(path, expect_columns=("dt",))
