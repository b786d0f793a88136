import io
import json

import pytest

from mwuopt.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main, parse_eps
from mwuopt.errors import ConfigError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def linear_file(tmp_path):
    f = tmp_path / "linear.txt"
    f.write_text("2 1:1\n1 1:2\n")
    return str(f)


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


class TestOptimize:
    def test_json(self):
        code, out, _ = call("optimize", "--objective", "coord-2x2", "--seed", "3")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["runs"][0]["report"]["verdict"] == "second-order-stationary"
        assert data["runs"][0]["trajectory"]["status"] == "converged"

    def test_baum_eagon_on_linear(self, linear_file):
        code, out, _ = call("optimize", "--objective", linear_file, "--method", "baum-eagon")
        assert code == EXIT_OK
        final = json.loads(out)["runs"][0]["trajectory"]["points"][-1]
        assert final[0][0] == pytest.approx(1.0, abs=1e-6)

    def test_text(self):
        code, out, _ = call("optimize", "--objective", "coord-2x2", "--starts", "3", "--format", "text")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0].split()[:2] == ["start", "status"] and len(lines) == 4

    def test_csv_per_start_files(self, tmp_path):
        target = tmp_path / "runs.csv"
        code, _, _ = call("optimize", "--objective", "coord-2x2", "--starts", "2", "--format", "csv",
                          "--out", str(target))
        assert code == EXIT_OK
        assert (tmp_path / "runs_0.csv").exists() and (tmp_path / "runs_1.csv").exists()

    def test_deterministic(self):
        args = ("optimize", "--objective", "trig-demo", "--starts", "2", "--seed", "5")
        assert call(*args)[1] == call(*args)[1]


class TestClassify:
    def test_mixed_point(self, tmp_path):
        point = write_json(tmp_path / "x.json", [[0.5, 0.5], [0.5, 0.5]])
        code, out, _ = call("classify", "--objective", "coord-2x2", "--point", point, "--eps", "0.1")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["report"]["verdict"] == "first-order-only"
        assert data["stability"]["verdict"] == "unstable"
        assert data["stability"]["spectral_radius"] == pytest.approx(22 / 21)

    def test_non_fixed_point(self, tmp_path, linear_file):
        point = write_json(tmp_path / "x.json", {"n": 1, "m": 2, "values": [[0.5, 0.5]]})
        code, out, _ = call("classify", "--objective", linear_file, "--point", point)
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["report"]["verdict"] == "non-stationary"
        assert data["stability"]["verdict"] == "n/a"

    def test_text(self, tmp_path):
        point = write_json(tmp_path / "x.json", [[1.0, 0.0], [1.0, 0.0]])
        code, out, _ = call("classify", "--objective", "coord-2x2", "--point", point, "--format", "text")
        assert code == EXIT_OK
        rows = dict(line.split(None, 1) for line in out.splitlines() if line.startswith(("verdict", "stability")))
        assert rows["verdict"].strip() == "second-order-stationary"
        assert rows["stability"].strip() == "not-unstable"

    def test_point_off_simplex(self, tmp_path):
        point = write_json(tmp_path / "x.json", [[0.5, 0.6], [0.5, 0.5]])
        code, _, err = call("classify", "--objective", "coord-2x2", "--point", point)
        assert code == EXIT_INPUT and "error" in err


class TestExperiments:
    def test_counterexample(self):
        code, out, _ = call("counterexample", "--grid", "1000")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["witness"]["gap"] <= 1e-9

    def test_counterexample_grid_too_small(self):
        assert call("counterexample", "--grid", "50")[0] == EXIT_INPUT

    def test_vector_field_csv(self, tmp_path):
        target = tmp_path / "field.csv"
        code, _, _ = call("vector-field", "--grid", "10", "--out", str(target))
        assert code == EXIT_OK
        lines = target.read_text().splitlines()
        assert lines[0] == "x,y,dx,dy" and len(lines) == 101

    def test_vector_field_needs_single_eps(self):
        assert call("vector-field", "--eps", "auto")[0] == EXIT_INPUT

    def test_basin(self):
        code, out, _ = call("basin", "--objective", "coord-2x2", "--starts", "20")
        assert code == EXIT_OK
        data = json.loads(out)
        assert sum(c["count"] for c in data["clusters"]) == data["converged"]

    def test_basin_csv(self):
        code, out, _ = call("basin", "--objective", "coord-2x2", "--starts", "20", "--format", "csv")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "center,count,verdict"

    def test_probe(self, linear_file):
        code, out, _ = call("probe", "--objective", linear_file, "--samples", "10")
        assert code == EXIT_OK
        assert all(r["min_det"] > 0 for r in json.loads(out)["rows"])

    def test_step_failure_is_reported_in_the_run(self, tmp_path):
        f = tmp_path / "steep.txt"
        f.write_text("-3 1:1\n")
        code, out, _ = call("optimize", "--objective", str(f), "--eps", "1.0")
        assert code == EXIT_OK
        assert json.loads(out)["runs"][0]["trajectory"]["status"] == "step-failure"

    def test_numerical_failure_exit_code(self):
        # an explicit step size the demo map cannot take
        assert call("vector-field", "--eps", "1.0")[0] == EXIT_NUMERICAL


class TestConfig:
    def test_config_file_and_override(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"objective": "coord-2x2", "starts": 3, "max-iter": 50})
        code, out, _ = call("optimize", "--config", cfg, "--starts", "2")
        assert code == EXIT_OK
        runs = json.loads(out)["runs"]
        assert len(runs) == 2
        assert all(r["trajectory"]["iterations"] <= 50 for r in runs)

    def test_unknown_key(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"objective": "coord-2x2", "colour": "red"})
        code, _, err = call("optimize", "--config", cfg)
        assert code == EXIT_INPUT and "colour" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ("optimize", "--objective", "coord-2x2", "--starts", "0"),
            ("optimize", "--objective", "coord-2x2", "--tol", "-1"),
            ("optimize",),
            ("classify", "--objective", "coord-2x2"),
            ("optimize", "--objective", "no/such/file.txt"),
        ],
    )
    def test_rejected(self, argv):
        assert call(*argv)[0] == EXIT_INPUT

    def test_malformed_objective(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("1 1:x\n")
        code, _, err = call("optimize", "--objective", str(f))
        assert code == EXIT_INPUT and err

    def test_bad_choice_exits_via_argparse(self):
        with pytest.raises(SystemExit) as exc:
            main(["optimize", "--method", "newton"], stdout=io.StringIO(), stderr=io.StringIO())
        assert exc.value.code == 2

    def test_parse_eps(self):
        assert parse_eps("auto") is None
        assert parse_eps("0.1,0.2") == [0.1, 0.2]
        assert parse_eps("0") == [0.0]
        for text in ("-0.1", "x", "inf"):
            with pytest.raises(ConfigError):
                parse_eps(text)
        with pytest.raises(ConfigError):
            parse_eps("0.1,0.2,0.3", num_players=2)
