import json

import numpy as np
import pytest

from leakage.channel_io import dump_channel, load_channel, load_distribution
from leakage.errors import ChannelParseError
from leakage.prob_core import bsc


class TestLoadChannel:

    def test_csv_with_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("# BSC(0.1)\n0.9,0.1\n\n0.1,0.9\n", encoding="utf-8")
        np.testing.assert_allclose(load_channel(path).rows, [[0.9, 0.1], [0.1, 0.9]])

    def test_json_rows(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(json.dumps({"rows": [[1, 0], [0.25, 0.75]]}), encoding="utf-8")
        np.testing.assert_allclose(load_channel(path).rows, [[1.0, 0.0], [0.25, 0.75]])

    def test_bad_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("0.5,0.5\n0.5,abc\n", encoding="utf-8")
        with pytest.raises(ChannelParseError) as excinfo:
            load_channel(path)
        assert excinfo.value.row == 2
        assert excinfo.value.column == 2
        assert "row 2" in str(excinfo.value)

    def test_locale_style_decimal_rejected(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text('"0,5","0,5"\n', encoding="utf-8")
        with pytest.raises(ChannelParseError):
            load_channel(path)

    def test_unnormalized_row_reported(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("0.5,0.5\n0.6,0.6\n", encoding="utf-8")
        with pytest.raises(ChannelParseError, match="row 1"):
            load_channel(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChannelParseError):
            load_channel(tmp_path / "nope.csv")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text("{rows: ", encoding="utf-8")
        with pytest.raises(ChannelParseError):
            load_channel(path)


class TestLoadDistribution:

    def test_single_row(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.25,0.75\n", encoding="utf-8")
        np.testing.assert_allclose(load_distribution(path).probs, [0.25, 0.75])

    def test_single_column(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.25\n0.75\n", encoding="utf-8")
        np.testing.assert_allclose(load_distribution(path).probs, [0.25, 0.75])

    def test_probs_key(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"probs": [0.5, 0.5]}), encoding="utf-8")
        assert load_distribution(path).support == (0, 1)

    def test_matrix_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.5,0.5\n0.5,0.5\n", encoding="utf-8")
        with pytest.raises(ChannelParseError):
            load_distribution(path)


class TestDumpChannel:

    @pytest.mark.parametrize("suffix", [".csv", ".json"])
    def test_written_file_reads_back_exactly(self, tmp_path, suffix):
        path = tmp_path / f"w{suffix}"
        dump_channel(bsc(0.1), path)
        np.testing.assert_array_equal(load_channel(path).rows, bsc(0.1).rows)

    def test_csv_uses_lf(self, tmp_path):
        path = tmp_path / "w.csv"
        dump_channel(bsc(0.1), path)
        assert b"\r\n" not in path.read_bytes()
