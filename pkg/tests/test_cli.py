import json
import os

import pytest

from choreocert.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


PARAMS4 = ["--n", "4", "--r", "7", "--d", "3", "--k1", "3", "--k2", "-4"]


class TestBounds:
    def test_table_contains_exact_constants(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", *PARAMS4)
        assert code == 0
        for token in ("144.6243", "138.9614", "170.7513", "139.2223"):
            assert token in out
        assert "threshold: 138.9614" in out

    def test_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", *PARAMS4, "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["threshold"] == min(c["bound"] for c in doc["cases"])
        assert [c["label"] for c in doc["cases"]] == ["1", "3", "4", "5"]

    def test_csv_format_full_precision(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", *PARAMS4, "--format", "csv")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "label,pair_i,pair_j,lattice_sizes,bound"
        value = float(lines[1].split(",")[-1])
        assert abs(value - 144.624327) < 1e-5

    def test_invalid_params_exit_2(self, capsys):
        code, _, err = run_cli(
            capsys, "bounds", "--n", "6", "--r", "7", "--d", "3", "--k1", "3", "--k2", "-6"
        )
        assert code == 2
        assert "gcd(N,3) != 1" in err

    def test_missing_params_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "bounds")
        assert code == 2
        assert "--n and --r" in err

    def test_out_file_written_atomically(self, capsys, tmp_path):
        out_path = tmp_path / "bounds.json"
        code, _, _ = run_cli(
            capsys, "bounds", *PARAMS4, "--format", "json", "--out", str(out_path)
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert "threshold" in doc
        assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]

    def test_n5_threshold(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--n", "5", "--r", "8", "--d", "3", "--k1", "3", "--k2", "-5"
        )
        assert code == 0
        assert "threshold: 181.0341" in out
        assert "N odd" in out


class TestCertify:
    def test_certified_exit_0(self, capsys):
        code, out, _ = run_cli(
            capsys, "certify", *PARAMS4, "--a", "0.23", "--b", "0.088"
        )
        assert code == 0
        assert "verdict: certified" in out
        assert "margin" in out

    def test_not_certified_exit_1(self, capsys):
        code, out, _ = run_cli(
            capsys, "certify", *PARAMS4, "--a", "10", "--b", "0.001"
        )
        assert code == 1
        assert "not certified" in out

    def test_requires_radii(self, capsys):
        code, _, err = run_cli(capsys, "certify", *PARAMS4)
        assert code == 2
        assert "--a and --b" in err

    def test_json_round_trips(self, capsys):
        code, out, _ = run_cli(
            capsys, "certify", *PARAMS4, "--a", "0.23", "--b", "0.088", "--format", "json"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "certified"
        assert doc["params"] == {"n": 4, "r": 7, "d": 3, "k1": 3, "k2": -4}

    def test_emit_plot(self, capsys, tmp_path):
        plot = tmp_path / "curves.csv"
        code, _, _ = run_cli(
            capsys,
            "certify", *PARAMS4, "--a", "0.23", "--b", "0.088",
            "--grid", "84", "--emit-plot", str(plot),
        )
        assert code == 0
        lines = plot.read_text().strip().split("\n")
        assert lines[0] == "t,body,x,y,vx,vy"
        assert len(lines) == 1 + 84 * 7


class TestMinimize:
    def test_full_run_files_and_exit(self, capsys, tmp_path):
        out = tmp_path / "res.json"
        code, stdout, _ = run_cli(
            capsys,
            "minimize", *PARAMS4, "--a", "0.23", "--b", "0.088",
            "--modes", "24", "--grid", "1344", "--out", str(out),
        )
        assert code == 0
        assert stdout.startswith("action=")
        assert "windings=main:3,triple:-4" in stdout
        doc = json.loads(out.read_text())
        assert doc["termination"] == "converged"
        assert doc["action"] <= 135.5123
        assert (tmp_path / "res.traj.csv").exists()
        log_lines = (tmp_path / "res.iters.csv").read_text().strip().split("\n")
        assert log_lines[0] == "iter,action,gradnorm,minsep,step"
        assert len(log_lines) == 2 + doc["iterations"]

    def test_reruns_byte_identical(self, capsys, tmp_path):
        args = [
            "minimize", *PARAMS4, "--a", "0.23", "--b", "0.088",
            "--modes", "24", "--grid", "1344",
        ]
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(capsys, *args, "--out", str(out1))[0] == 0
        assert run_cli(capsys, *args, "--out", str(out2))[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert (tmp_path / "a.traj.csv").read_bytes() == (tmp_path / "b.traj.csv").read_bytes()
        assert (tmp_path / "a.iters.csv").read_bytes() == (tmp_path / "b.iters.csv").read_bytes()

    def test_resume_from_result(self, capsys, tmp_path):
        first = tmp_path / "first.json"
        run_cli(
            capsys,
            "minimize", *PARAMS4, "--a", "0.23", "--b", "0.088",
            "--modes", "24", "--grid", "1344", "--out", str(first),
        )
        second = tmp_path / "second.json"
        code, _, _ = run_cli(
            capsys,
            "minimize", "--loop-in", str(first),
            "--modes", "24", "--grid", "1344", "--out", str(second),
        )
        assert code == 0
        doc1 = json.loads(first.read_text())
        doc2 = json.loads(second.read_text())
        assert doc2["iterations"] <= 2
        assert abs(doc2["action"] - doc1["action"]) <= 1e-10

    def test_solver_failure_exit_3(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys,
            "minimize", *PARAMS4, "--a", "0.1", "--b", "0.0995",
            "--modes", "24", "--grid", "672", "--out", str(tmp_path / "x.json"),
        )
        assert code == 3
        assert "separation guard" in err

    def test_requires_start(self, capsys):
        code, _, err = run_cli(capsys, "minimize", *PARAMS4)
        assert code == 2
        assert "--a/--b or --loop-in" in err


class TestLemmas:
    def test_pass_exit_0(self, capsys):
        code, out, _ = run_cli(capsys, "lemmas", *PARAMS4)
        assert code == 0
        assert out.count("PASS") == 5

    def test_negative_needs_force(self, capsys):
        args = ["lemmas", "--n", "4", "--r", "9", "--d", "3", "--k1", "3", "--k2", "-4"]
        code, _, err = run_cli(capsys, *args)
        assert code == 2
        assert "gcd(r,3) != 1" in err
        code, out, _ = run_cli(capsys, *args, "--force")
        assert code == 1
        assert "FAIL" in out and "coincide" in out


class TestConfig:
    def test_config_file_supplies_flags(self, capsys, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("n=4\nr=7\nd=3\nk1=3\nk2=-4\n# comment\nformat=json\n")
        code, out, _ = run_cli(capsys, "bounds", "--config", str(conf))
        assert code == 0
        assert json.loads(out)["threshold"] == pytest.approx(138.961356, abs=1e-5)

    def test_cli_flags_override_config(self, capsys, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("n=4\nr=7\nd=3\nk1=3\nk2=-4\n")
        code, out, _ = run_cli(capsys, "bounds", "--config", str(conf), "--n", "5",
                               "--r", "8", "--k2", "-5")
        assert code == 0
        assert "181.0341" in out

    def test_unknown_key_rejected(self, capsys, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("nope=1\n")
        code, _, err = run_cli(capsys, "bounds", "--config", str(conf))
        assert code == 2
        assert "nope" in err
