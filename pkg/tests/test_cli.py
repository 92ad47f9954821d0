import csv
import io
import json
import math

import pytest

from manybody_otto.cli import ENV_OUTPUT_DIR, TABLE_FIELDS, main, parse_grid, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


CYCLE_RK = ("cycle", "--driving", "sudden", "--x", "0.7071", "--a", "0.25", "--n", "1", "--lambda", "0")


class TestParsing:
    def test_grids(self):
        assert parse_grid("0.1,0.2") == (0.1, 0.2)
        assert parse_grid("0.05:0.95:0.05")[-1] == pytest.approx(0.95)
        assert len(parse_grid("0.05:0.95:0.05")) == 19
        assert parse_grid("150,200", int) == (150, 200)

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nx = 0.5\n\na = 0.25  # trailing\n")
        assert read_config(str(path)) == [("x", "0.5"), ("a", "0.25")]


class TestCycle:
    def test_sudden_efficiency(self, capsys):
        code, out, _ = run(capsys, *CYCLE_RK, "--beta-c", "0.01")
        assert code == 0
        (row,) = rows(out)
        assert float(row["efficiency"]) == pytest.approx(0.2, abs=1e-3)
        assert row["engine_valid"] == "true"

    def test_inverted_beta_is_not_an_engine(self, capsys):
        # beta_c = 100 freezes the cold bath of a single particle: the cycle cannot run as an engine
        code, out, _ = run(capsys, *CYCLE_RK, "--beta-c", "100")
        (row,) = rows(out)
        assert code == 0 and row["engine_valid"] == "false" and row["efficiency"] == "nan"

    def test_adiabatic_is_otto(self, capsys):
        code, out, _ = run(capsys, "cycle", "--driving", "adiabatic", "--x", "0.5", "--a", "0.25", "--beta-c", "0.01")
        assert code == 0 and float(rows(out)[0]["efficiency"]) == 0.5

    def test_record_fields(self, capsys):
        _, out, _ = run(capsys, *CYCLE_RK, "--beta-c", "0.01", "--format", "json")
        (rec,) = json.loads(out)
        for key in ("energy_A", "energy_D", "W1", "Q2", "W3", "Q4", "eta_nad_bound"):
            assert key in rec
        assert rec["W1"] + rec["Q2"] + rec["W3"] + rec["Q4"] == pytest.approx(0, abs=1e-9 * rec["Q2"])

    def test_missing_beta_c(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(list(CYCLE_RK))
        assert info.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_invalid_parameter(self, capsys):
        code, _, err = run(capsys, "cycle", "--x", "1.5", "--a", "0.25", "--beta-c", "0.01")
        assert code == 2 and "x" in err

    def test_ramp(self, capsys):
        code, out, _ = run(
            capsys, "cycle", "--driving", "ramp", "--ramp-time", "5", "--x", "0.5", "--a", "0.25", "--beta-c", "0.01"
        )
        row = rows(out)[0]
        assert code == 0 and float(row["q_ab"]) > 1 and float(row["power"]) == pytest.approx(float(row["work"]) / 12)


class TestConfig:
    def test_merge_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("driving = adiabatic\nx = 0.5\na = 0.25\nbeta-c = 0.01\nformat = json\n")
        code, out, _ = run(capsys, "cycle", "--config", str(cfg))
        assert code == 0 and json.loads(out)[0]["efficiency"] == 0.5
        code, out, _ = run(capsys, "cycle", "--config", str(cfg), "--x", "0.6")
        assert json.loads(out)[0]["efficiency"] == pytest.approx(0.4, rel=1e-12)

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("temperature = 3\n")
        with pytest.raises(SystemExit) as info:
            main(["cycle", "--config", str(cfg)])
        assert info.value.code == 2
        assert "temperature" in capsys.readouterr().err

    def test_missing_config_file(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["cycle", "--config", str(tmp_path / "absent.cfg")])
        assert info.value.code == 2


class TestTables:
    ARGS = ("sweep", "--a", "0.2,0.3", "--n", "200", "--lambda", "0,1", "--sigma-c", "2", "--workers", "1")

    def test_header(self, capsys):
        _, out, _ = run(capsys, *self.ARGS)
        assert out.splitlines()[0] == ",".join(TABLE_FIELDS)
        assert out.splitlines()[0] == "a,x,n,lambda,sigma_c,sigma_h,driving,work,efficiency,power,r,rho,q2_positive,engine_valid"
        table = rows(out)
        assert [(r["lambda"], r["a"]) for r in table] == [("0", "0.2"), ("0", "0.3"), ("1", "0.2"), ("1", "0.3")]

    def test_precision(self, capsys):
        _, out, _ = run(capsys, *self.ARGS, "--precision", "4")
        work = rows(out)[0]["work"]
        assert len(work.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 4

    def test_json_round_trip(self, capsys):
        _, text, _ = run(capsys, *self.ARGS, "--format", "json")
        data = json.loads(text)
        assert json.dumps(data, indent=2) + "\n" == text
        _, csv_text, _ = run(capsys, *self.ARGS)
        for rec, row in zip(data, rows(csv_text)):
            assert list(rec) == list(TABLE_FIELDS)
            for key in ("work", "efficiency", "r", "rho", "x"):
                assert rec[key] == float(row[key])

    def test_deterministic(self, capsys):
        outs = {run(capsys, *self.ARGS, "--format", fmt)[1] for fmt in ("csv",) * 2}
        assert len(outs) == 1
        parallel = run(capsys, *self.ARGS[:-2], "--workers", "2")[1]
        assert parallel in outs

    def test_lambda_series(self, capsys):
        _, out, _ = run(capsys, "sweep", "--a", "0.05:0.95:0.05", "--lambda", "0,0.2,0.5,1", "--beta-c", "0.01", "--n", "200")
        table = rows(out)
        assert len(table) == 76 and {r["lambda"] for r in table} == {"0", "0.2", "0.5", "1"}
        at = {(r["lambda"], r["a"]): float(r["rho"]) for r in table}
        assert at[("0", "0.3")] > 1 and at[("0.2", "0.3")] > 1 and at[("1", "0.3")] < 1

    def test_single_point_sweep_matches_cycle(self, capsys):
        _, sweep_out, _ = run(
            capsys, "sweep", "--convention", "same_resources", "--x", "0.7", "--a", "0.3", "--n", "200",
            "--sigma-c", "2", "--format", "json",
        )
        _, cycle_out, _ = run(
            capsys, "cycle", "--x", "0.7", "--a", "0.3", "--n", "200", "--beta-c", "0.01", "--format", "json"
        )
        s, c = json.loads(sweep_out)[0], json.loads(cycle_out)[0]
        for key in ("a", "x", "n", "lambda", "driving", "work", "efficiency", "power", "q2_positive", "engine_valid"):
            assert s[key] == c[key], key
        assert s["sigma_c"] == pytest.approx(c["sigma_c"], rel=1e-12)
        assert s["sigma_h"] == pytest.approx(c["sigma_h"], rel=1e-12)

    def test_invalid_points_are_rows(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--convention", "same_resources", "--x", "0.5", "--a", "0.9", "--sigma-c", "2", "--format", "json"
        )
        (rec,) = json.loads(out)
        assert code == 0 and rec["engine_valid"] is False and rec["r"] is None

    def test_sigma_and_beta_exclusive(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["sweep", "--a", "0.3", "--sigma-c", "2", "--beta-c", "0.01"])
        assert info.value.code == 2

    def test_optimize_example(self, capsys):
        code, out, _ = run(capsys, "optimize", "--driving", "sudden", "--n", "200", "--lambda", "0", "--sigma-c", "2", "--a", "0.3")
        row = rows(out)[0]
        a = 0.3
        assert code == 0 and a**0.25 * 0.8 < float(row["x"]) < a**0.25 * 1.1
        assert float(row["efficiency"]) > (1 - math.sqrt(a)) / (2 + math.sqrt(a))
        assert float(row["r"]) > 1 and float(row["rho"]) > 1


class TestOutput:
    def test_env_output_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path))
        code, out, _ = run(capsys, *CYCLE_RK, "--beta-c", "0.01", "--output", "rk.csv")
        assert code == 0 and out == ""
        assert rows((tmp_path / "rk.csv").read_text())[0]["driving"] == "sudden"
        code, _, _ = run(capsys, *CYCLE_RK, "--beta-c", "0.01")
        assert code == 0 and (tmp_path / "cycle.csv").exists()

    def test_unwritable_path(self, capsys, tmp_path):
        code, _, err = run(capsys, *CYCLE_RK, "--beta-c", "0.01", "--output", str(tmp_path / "missing" / "x.csv"))
        assert code != 0 and "cannot write" in err


class TestValidate:
    def test_only(self, capsys):
        code, out, _ = run(capsys, "validate", "--only", "husimi")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("PASS  husimi") and lines[-1] == "1/1 checks passed"

    def test_seeded_reproducible(self, capsys):
        first = run(capsys, "validate", "--only", "husimi,first_law", "--seed", "7")[1]
        assert first == run(capsys, "validate", "--only", "husimi", "--only", "first_law", "--seed", "7")[1]

    def test_unknown_check(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["validate", "--only", "nonsense"])
        assert info.value.code == 2

    def test_failure_exit_code(self, capsys, monkeypatch):
        from manybody_otto import cli
        from manybody_otto.validation import CheckResult

        monkeypatch.setattr(cli, "run_checks", lambda names, seed: [CheckResult("husimi", False, 1.0, 1e-8, "")])
        code, out, _ = run(capsys, "validate", "--only", "husimi")
        assert code == 1 and out.startswith("FAIL")
