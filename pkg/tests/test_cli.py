import csv
import io
import math

import numpy as np
import pytest

from driftgames.cli import main
from driftgames.config import ConfigError, Variant
from driftgames.harness import SIMULATE_COLUMNS, SWEEP_COLUMNS, SweepSpec, fmt, loglog_slope, sweep


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSimulate:
    ARGS = ("simulate", "--variant", "v3", "--T", "64", "--N", "20", "--gamma", "0.5",
            "--theta", "0.6", "--seed", "1")

    def test_row_schema(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        assert out.splitlines()[0] == ",".join(SIMULATE_COLUMNS)
        (row,) = parse(out)
        assert 0.0 <= float(row["loss"]) <= 1.0
        assert float(row["minSlack"]) >= -1e-12
        assert float(row["lowerMain"]) <= float(row["upperMain"])

    def test_byte_identical(self, capsys):
        assert run(capsys, *self.ARGS)[1] == run(capsys, *self.ARGS)[1]

    def test_delta_above_one(self, capsys):
        code, _, err = run(capsys, "simulate", "--variant", "v1", "--T", "4", "--N", "2", "--gamma", "5")
        assert code == 2 and "delta" in err

    def test_adversary_abort(self, capsys):
        code, _, err = run(capsys, "simulate", "--variant", "v1", "--T", "2", "--N", "12", "--gamma", "1",
                           "--adversary", "randomFeasible", "--retries", "1")
        assert code == 3 and "abort" in err

    def test_missing_N(self, capsys):
        assert run(capsys, "simulate", "--variant", "v3")[0] == 2

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "row.csv"
        code, out, _ = run(capsys, *self.ARGS, "--out", str(path))
        assert code == 0 and out == ""
        assert path.read_text().startswith("variant,T,N")


class TestConfigFile:
    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# manifest\nvariant = v4\nT = 32\nN = 5\ngamma = 0.25\nseed = 7\n")
        code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--T", "48")
        (row,) = parse(out)
        assert code == 0
        assert (row["variant"], row["T"], row["N"], row["seed"]) == ("v4", "48", "5", "7")

    @pytest.mark.parametrize("text", ["T 32\n", "colour = red\n"])
    def test_bad_file(self, capsys, tmp_path, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        assert run(capsys, "simulate", "--config", str(cfg))[0] == 2

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "bounds", "--config", str(tmp_path / "nope.cfg"))[0] == 2


class TestBoundsAndOracle:
    def test_bounds(self, capsys):
        code, out, _ = run(capsys, "bounds", "--variant", "v3", "--gamma", "0.5", "--T", "10000",
                           "--theta", "0.5")
        rows = parse(out)
        assert code == 0 and [r["side"] for r in rows] == ["upper", "lower"]
        assert float(rows[1]["a"]) == pytest.approx(0.777817, abs=1e-6)
        assert float(rows[1]["b"]) == pytest.approx(2.236068, abs=1e-6)
        assert rows[0]["nRequirement"] == ""

    def test_bounds_v2_limit(self, capsys):
        _, out, _ = run(capsys, "bounds", "--variant", "v2", "--gamma", "0", "--T", "100")
        assert float(parse(out)[0]["leadingLimit"]) == 1.0

    @pytest.mark.parametrize("argv, expected", [
        (("--variant", "v1", "--T", "5", "--N", "1"), "lower=0 upper=0"),
        (("--variant", "v1", "--T", "4", "--N", "2", "--delta", "1"), "lower=0 upper=0"),
        (("--variant", "v1", "--T", "2", "--N", "2"), "lower=0.5 upper=0.5"),
    ])
    def test_oracle(self, capsys, argv, expected):
        code, out, _ = run(capsys, "oracle", *argv)
        assert code == 0 and out.startswith(expected)

    def test_oracle_rejects_interval_variant(self, capsys):
        assert run(capsys, "oracle", "--variant", "v2", "--T", "2", "--N", "2")[0] == 2


class TestSweep:
    BASE = ("sweep", "--variant", "v3", "--gamma", "0,0.5", "--T", "16,32,64", "--reps", "3",
            "--adversary", "randomFeasible", "--seed", "5")

    def test_schema_and_jobs_independence(self, capsys):
        code1, out1, err1 = run(capsys, *self.BASE, "--jobs", "1")
        code2, out2, _ = run(capsys, *self.BASE, "--jobs", "2")
        assert out1 == out2
        rows = parse(out1)
        assert list(rows[0]) == list(SWEEP_COLUMNS)
        assert len(rows) == 6
        assert "gamma=0 " in err1 and "slope=" in err1

    def test_single_T_slope_undefined(self, capsys):
        code, out, err = run(capsys, "sweep", "--variant", "v4", "--gamma", "0.5", "--T", "32", "--reps", "2")
        assert parse(out)[0]["slope"] == "nan"
        assert "slope=undefined" in err
        assert code in (0, 1)

    def test_empty_T_list(self, capsys):
        assert run(capsys, "sweep", "--variant", "v3", "--gamma", "0.5", "--T", "")[0] == 2

    def test_decreasing_T_list(self, capsys):
        assert run(capsys, "sweep", "--variant", "v3", "--gamma", "0.5", "--T", "64,32")[0] == 2

    def test_cap_warning(self, capsys):
        code, out, err = run(capsys, "sweep", "--variant", "v1", "--gamma", "0", "--T", "8",
                             "--ncap", "50", "--reps", "1", "--adversary", "greedy")
        assert "capped" in err
        assert parse(out)[0]["N"] == "50"

    def test_failures_recorded_and_sweep_continues(self):
        spec = SweepSpec(Variant.V1, (1.0,), (2, 4), reps=2, n_rule="explicit", N=12,
                         adversary="randomFeasible", retry_budget=1)
        result = sweep(spec)
        assert result.cells[0].failures >= 1
        assert len(result.cells) == 2


class TestHelpers:
    def test_fmt_round_trip(self):
        for x in (0.1, 1 / 3, 2.0**-40, 1e300, 12345.678):
            assert float(fmt(x)) == x
        assert fmt(float("nan")) == "nan"
        assert fmt(Variant.V2) == "v2"
        assert fmt(True) == "1"

    def test_slope_exact_power_law(self):
        Ts = [64, 256, 1024, 4096]
        gaps = [3.0 * T**-0.15 for T in Ts]
        assert loglog_slope(Ts, gaps) == pytest.approx(-0.15, abs=1e-12)
        assert loglog_slope(Ts[:2], gaps[:2]) is None
        assert math.isnan(loglog_slope(Ts, [0.0, 1.0, 1.0, 1.0]))

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            SweepSpec(Variant.V3, (0.5,), ())
        with pytest.raises(ConfigError):
            SweepSpec(Variant.V3, (0.5,), (4,), reps=0)
        with pytest.raises(ConfigError):
            SweepSpec(Variant.V3, (0.5,), (4,), n_rule="explicit")
        with pytest.raises(ConfigError):
            SweepSpec(Variant.V3, (0.5,), (4,), n_rule="guess")

    def test_power_rule(self):
        spec = SweepSpec(Variant.V1, (0.5,), (64,), n_rule="power")
        assert spec.chips(64) == (math.ceil(64 ** 0.65), False)
        assert np.isclose(spec.chips(4096)[0], math.ceil(4096 ** 0.65))


def test_check_command(capsys):
    code, out, _ = run(capsys, "check")
    assert code == 0
    assert out.count("PASS") == 6
