import csv
import io
import json

import pytest

from leakage_cli import (
    EXIT_ALPHA,
    EXIT_FAILED,
    EXIT_INPUT,
    EXIT_NOT_MONOTONE,
    EXIT_OK,
    _non_monotone_pairs,
    main,
    parse_alpha_grid,
    parse_alpha_list,
)
from leakage.errors import AlphaOutOfRange
from models.prob_model import AlphaOrder


@pytest.fixture
def channel_files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return {
        "bsc01": write("bsc01.csv", "0.9,0.1\n0.1,0.9\n"),
        "bsc02": write("bsc02.csv", "0.8,0.2\n0.2,0.8\n"),
        "identity": write("identity.csv", "1,0\n0,1\n"),
        "rank_one": write("rank_one.csv", "0.3,0.7\n0.3,0.7\n"),
        "bad": write("bad.csv", "0.5,0.5\n0.5,x\n"),
        "prior": write("prior.csv", "0.2,0.8\n"),
    }


def _sweep_rows(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestAlphaParsing:

    def test_list(self):
        assert [str(a) for a in parse_alpha_list("1, 2,inf")] == ["1", "2.0", "inf"]

    def test_empty_list(self):
        with pytest.raises(AlphaOutOfRange):
            parse_alpha_list(" , ")

    def test_grid(self):
        grid = parse_alpha_grid("2:200:3")
        assert [a.value for a in grid] == pytest.approx([2.0, 20.0, 200.0])

    @pytest.mark.parametrize("text", ["2:200", "0:10:3", "1:inf:3", "a:b:c"])
    def test_bad_grid(self, text):
        with pytest.raises(AlphaOutOfRange):
            parse_alpha_grid(text)


class TestCompute:

    def test_maxl_defaults_to_bits(self, channel_files, capsys):
        assert main(["compute", "maxl", "--channel", channel_files["bsc01"]]) == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(0.847997, abs=1e-6)

    def test_alpha_leakage_identity(self, channel_files, capsys):
        code = main(["compute", "alpha-leakage", "--channel", channel_files["identity"], "--alpha", "1"])
        assert code == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)

    def test_sibson_nats(self, channel_files, capsys):
        code = main(["compute", "sibson", "--channel", channel_files["bsc01"], "--alpha", "2", "--nats"])
        assert code == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(0.494696, abs=1e-6)

    def test_several_alphas(self, channel_files, capsys):
        main(["compute", "max-alpha-leakage", "--channel", channel_files["bsc01"], "--alpha", "1,inf", "--nats"])
        rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
        assert [r[0] for r in rows] == ["1", "inf"]
        assert float(rows[1][1]) == pytest.approx(0.587787, abs=1e-6)

    def test_prior_file(self, channel_files, capsys):
        main(["compute", "max-alpha-leakage", "--channel", channel_files["bsc01"], "--alpha", "1",
              "--prior", channel_files["prior"], "--nats"])
        # 非均匀先验下 α=1 的值低于 Shannon 容量
        assert float(capsys.readouterr().out) < 0.368064

    def test_output_file(self, channel_files, tmp_path):
        target = tmp_path / "out.txt"
        main(["compute", "maxl", "--channel", channel_files["identity"], "--output", str(target)])
        assert float(target.read_text(encoding="utf-8")) == pytest.approx(1.0)

    def test_bad_cell_exits_2(self, channel_files, capsys):
        assert main(["compute", "maxl", "--channel", channel_files["bad"]]) == EXIT_INPUT
        assert "row 2" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["compute", "maxl", "--channel", str(tmp_path / "none.csv")]) == EXIT_INPUT

    def test_alpha_below_one_exits_3(self, channel_files):
        code = main(["compute", "alpha-leakage", "--channel", channel_files["bsc01"], "--alpha", "0.5"])
        assert code == EXIT_ALPHA

    def test_unparseable_alpha_exits_3(self, channel_files):
        assert main(["compute", "sibson", "--channel", channel_files["bsc01"], "--alpha", "two"]) == EXIT_ALPHA

    def test_missing_channel(self, capsys):
        assert main(["compute", "sibson", "--alpha", "2"]) == EXIT_INPUT


class TestSweep:

    def test_bsc_values(self, channel_files, capsys):
        assert main(["sweep", "--channel", channel_files["bsc01"], "--alpha", "1,2,inf"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "alpha,value_nats,value_bits,converged"
        rows = _sweep_rows(out)
        assert [r["alpha"] for r in rows] == ["1", "2.0", "inf"]
        expected = [0.368064, 0.494696, 0.587787]
        for row, value in zip(rows, expected):
            assert float(row["value_nats"]) == pytest.approx(value, abs=1e-6)
            assert float(row["value_bits"]) == pytest.approx(value / 0.6931471805599453, abs=1e-6)
            assert row["converged"] == "true"

    def test_rank_one_is_zero(self, channel_files, capsys):
        main(["sweep", "--channel", channel_files["rank_one"], "--alpha", "1,2,inf"])
        rows = _sweep_rows(capsys.readouterr().out)
        assert all(abs(float(r["value_nats"])) <= 1e-9 for r in rows)

    def test_other_measure(self, channel_files, capsys):
        main(["sweep", "sibson", "--channel", channel_files["identity"], "--alpha", "0.5,2"])
        rows = _sweep_rows(capsys.readouterr().out)
        assert all(float(r["value_bits"]) == pytest.approx(1.0) for r in rows)

    def test_non_monotone_pairs(self):
        alphas = [AlphaOrder.of(a) for a in ("inf", "1", "2")]
        pairs = _non_monotone_pairs(alphas, [0.5, 0.3, 0.6])
        assert [(str(lo), str(hi)) for lo, hi in pairs] == [("2.0", "inf")]
        assert _non_monotone_pairs(alphas, [0.6, 0.3, 0.5]) == []

    def test_exit_code_constant(self):
        assert EXIT_NOT_MONOTONE == 6


class TestVerify:

    def test_composition_files(self, channel_files, tmp_path, capsys):
        code = main(["verify", "--check", "composition", "--channel", channel_files["bsc01"],
                     "--channel2", channel_files["bsc02"], "--alpha", "inf", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len(records) == 1
        assert records[0]["theorem_id"] == "composition"
        assert records[0]["passed"]

    def test_dpi_default_alphas(self, channel_files, tmp_path, capsys):
        main(["verify", "--check", "dpi", "--channel", channel_files["bsc01"],
              "--channel2", channel_files["bsc02"], "--output-dir", str(tmp_path)])
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len(records) == 6
        assert {r["theorem_id"] for r in records} == {"dpi.xy", "dpi.yz"}

    def test_bounds_on_rank_one(self, channel_files, tmp_path, capsys):
        code = main(["verify", "--check", "bounds", "--channel", channel_files["rank_one"],
                     "--alpha", "2", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        assert "✅" in capsys.readouterr().err

    def test_shatter_with_copies(self, channel_files, tmp_path, capsys):
        code = main(["verify", "--check", "shatter", "--channel", channel_files["bsc01"], "--copies", "2,3",
                     "--alpha", "2", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK

    def test_shatter_capacity(self, channel_files, tmp_path, capsys):
        code = main(["verify", "--check", "shatter-capacity", "--channel", channel_files["bsc01"],
                     "--copies", "2,1", "--alpha", "2,inf", "--output-dir", str(tmp_path)])
        assert code == EXIT_OK
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [r["theorem_id"] for r in records] == ["shatter.capacity", "shatter.capacity"]
        assert records[0]["rhs"] == pytest.approx(0.494696, abs=1e-6)

    def test_missing_second_channel(self, channel_files, tmp_path):
        code = main(["verify", "--check", "dpi", "--channel", channel_files["bsc01"],
                     "--output-dir", str(tmp_path)])
        assert code == EXIT_INPUT

    def test_needs_input(self, tmp_path):
        assert main(["verify", "--output-dir", str(tmp_path)]) == EXIT_INPUT

    @pytest.mark.slow
    def test_random_instances(self, tmp_path, capsys):
        code = main(["verify", "--random", "20", "--seed", "7", "--output-dir", str(tmp_path)])
        captured = capsys.readouterr()
        assert code == EXIT_OK, captured.err
        records = [json.loads(line) for line in captured.out.splitlines()]
        assert {r["seed"] for r in records} == set(range(70000, 70020))
        assert (tmp_path / "check_tree.json").exists()
        assert "Maximal alpha-leakage properties" in captured.err


class TestCompose:

    def test_two_bscs(self, channel_files, capsys):
        code = main(["compose", channel_files["bsc01"], channel_files["bsc02"], "--nats"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "alpha=inf units=nats"
        values = [float(line.rsplit(":", 1)[1]) for line in lines[1:]]
        assert values == pytest.approx([0.587787, 0.470004, 1.05779, 0.587787], abs=1e-5)

    def test_single_release(self, channel_files, capsys):
        assert main(["compose", channel_files["identity"], "--alpha", "2"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert float(lines[-1].rsplit(":", 1)[1]) == pytest.approx(1.0, abs=1e-8)

    def test_input_size_mismatch(self, channel_files, tmp_path):
        wide = tmp_path / "three.csv"
        wide.write_text("1,0\n0,1\n0.5,0.5\n", encoding="utf-8")
        assert main(["compose", channel_files["bsc01"], str(wide)]) == EXIT_INPUT

    def test_failed_exit_constant(self):
        assert EXIT_FAILED == 5
