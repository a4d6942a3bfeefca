"""Command-line driver: subcommands, exit codes, output files."""

import csv
import json

import pytest

from subsetavg import cli


def run(argv):
    return cli.main(argv)


def read_csv(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


class TestSweep:
    def test_default_outputs(self, tmp_path, capsys):
        code = run(["sweep", "--out", str(tmp_path), "--no-timestamp"])
        assert code == 0
        cands = read_csv(tmp_path / "sweep_candidates.csv")
        avgs = read_csv(tmp_path / "sweep_averages.csv")
        assert len(cands) == 24
        assert len(avgs) == 2
        assert {r["criterion"] for r in avgs} == {"perfect", "subspace"}
        assert "replication" not in cands[0]
        out = capsys.readouterr().out
        assert "model t_min" in out
        assert "criterion" in out

    def test_row_identity(self, tmp_path):
        run(["sweep", "--out", str(tmp_path), "--no-timestamp"])
        for row in read_csv(tmp_path / "sweep_candidates.csv"):
            lhs = float(row["ic_perfect"])
            rhs = float(row["ic_subspace"]) - float(row["d_K"])
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_model_filter(self, tmp_path):
        code = run(["sweep", "--out", str(tmp_path), "--models", "f1",
                    "--no-timestamp"])
        assert code == 0
        cands = read_csv(tmp_path / "sweep_candidates.csv")
        assert len(cands) == 12
        assert {r["model"] for r in cands} == {"f1"}

    def test_criterion_filter(self, tmp_path):
        code = run(["sweep", "--out", str(tmp_path), "--criterion",
                    "perfect", "--no-timestamp"])
        assert code == 0
        avgs = read_csv(tmp_path / "sweep_averages.csv")
        assert len(avgs) == 1
        assert avgs[0]["criterion"] == "perfect"

    def test_replications(self, tmp_path):
        code = run(["sweep", "--out", str(tmp_path), "--replications", "2",
                    "--no-timestamp"])
        assert code == 0
        cands = read_csv(tmp_path / "sweep_candidates.csv")
        avgs = read_csv(tmp_path / "sweep_averages.csv")
        assert len(cands) == 48
        assert [r["replication"] for r in cands] == ["0"] * 24 + ["1"] * 24
        assert len(avgs) == 4
        # fresh data per replication: the fitted values must differ
        a0_rep0 = {r["a0"] for r in cands if r["replication"] == "0"}
        a0_rep1 = {r["a0"] for r in cands if r["replication"] == "1"}
        assert a0_rep0 != a0_rep1
        # weights normalize within each replication separately
        for rep in ("0", "1"):
            total = sum(float(r["w_subspace"]) for r in cands
                        if r["replication"] == rep)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_no_timestamp_reruns_identical(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run(["sweep", "--out", str(out_a), "--no-timestamp"])
        run(["sweep", "--out", str(out_b), "--no-timestamp"])
        for name in ("sweep_candidates.csv", "sweep_averages.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_timestamp_differs_only_in_header(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run(["sweep", "--out", str(out_a)])
        run(["sweep", "--out", str(out_b)])
        for name in ("sweep_candidates.csv", "sweep_averages.csv"):
            lines_a = (out_a / name).read_text().splitlines()
            lines_b = (out_b / name).read_text().splitlines()
            assert lines_a[0].startswith("# generated: ")
            assert lines_a[1:] == lines_b[1:]

    def test_seed_changes_data(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run(["sweep", "--out", str(out_a), "--seed", "1", "--no-timestamp"])
        run(["sweep", "--out", str(out_b), "--seed", "2", "--no-timestamp"])
        text_a = (out_a / "sweep_candidates.csv").read_text()
        text_b = (out_b / "sweep_candidates.csv").read_text()
        assert text_a != text_b


class TestNScaling:
    def test_with_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# small ladder\n"
            "n_list = 40, 80\n"
            "t_min_stop = 4\n"
            "criterion = subspace\n"
            "seed = 7\n")
        code = run(["nscaling", "--config", str(cfg), "--out",
                    str(tmp_path), "--no-timestamp"])
        assert code == 0
        rows = read_csv(tmp_path / "nscaling_averages.csv")
        assert [r["N"] for r in rows] == ["40", "80"]
        assert {r["criterion"] for r in rows} == {"subspace"}

    def test_replication_column(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n_list = 40\ncriterion = perfect\n")
        code = run(["nscaling", "--config", str(cfg), "--out", str(tmp_path),
                    "--replications", "2", "--no-timestamp"])
        assert code == 0
        rows = read_csv(tmp_path / "nscaling_averages.csv")
        assert [r["replication"] for r in rows] == ["0", "1"]


class TestConfigErrors:
    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n_samples = 40\nbogus_key = 1\n")
        code = run(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "config error" in err
        assert "bogus_key" in err
        assert "line 2" in err

    def test_bad_value(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n_samples = lots\n")
        code = run(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 2
        assert "n_samples" in capsys.readouterr().err

    def test_invalid_after_parse(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n_samples = 1\n")
        code = run(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 2

    def test_missing_config_file(self, tmp_path, capsys):
        code = run(["sweep", "--config", str(tmp_path / "absent.cfg"),
                    "--out", str(tmp_path)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_model_name(self, tmp_path, capsys):
        code = run(["sweep", "--out", str(tmp_path), "--models", "f9"])
        assert code == 2

    def test_argparse_rejects_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2


class TestIoErrors:
    def test_out_dir_under_regular_file(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory\n")
        code = run(["sweep", "--out", str(blocker / "sub"),
                    "--no-timestamp"])
        assert code == 3
        assert "i/o error" in capsys.readouterr().err


class TestKlDemo:
    def test_closed_form_payload(self, tmp_path, capsys):
        code = run(["kl-demo", "--mc-draws", "0", "--out", str(tmp_path),
                    "--no-timestamp"])
        assert code == 0
        payload = json.loads((tmp_path / "kl_demo.json").read_text())
        assert payload["I_f_g"] == pytest.approx(0.06896624075987828,
                                                 abs=1e-12)
        assert payload["I_f1_h"] == pytest.approx(0.036065887387415535,
                                                  abs=1e-12)
        assert payload["I_f_hprime"] == pytest.approx(0.10283158369967688,
                                                      abs=1e-12)
        assert payload["I_f1_g1"] == pytest.approx(0.002200544447616984,
                                                   abs=1e-12)
        assert payload["mc"] == {}
        assert "generated" not in payload
        # stdout carries the same JSON
        printed = json.loads(capsys.readouterr().out)
        assert printed == payload

    def test_mc_cross_check(self, tmp_path):
        code = run(["kl-demo", "--mc-draws", "2000", "--seed", "5",
                    "--out", str(tmp_path), "--no-timestamp"])
        assert code == 0
        payload = json.loads((tmp_path / "kl_demo.json").read_text())
        for name in ("I_f_g", "I_f1_h", "I_f_hprime"):
            entry = payload["mc"][name]
            assert entry["n_draws"] == 2000
            assert abs(entry["estimate"] - payload[name]) \
                <= 3.0 * entry["std_error"]

    def test_dim_check(self, tmp_path):
        code = run(["kl-demo", "--mc-draws", "0", "--dim-check",
                    "--out", str(tmp_path), "--no-timestamp"])
        assert code == 0
        payload = json.loads((tmp_path / "kl_demo.json").read_text())
        assert payload["dim_check"]["projected"] \
            <= payload["dim_check"]["full"] + 1e-12
        assert payload["dim_check"]["projected"] == pytest.approx(
            payload["I_f1_g1"], abs=1e-12)

    def test_self_test_failure_exit_code(self, tmp_path, monkeypatch,
                                         capsys):
        # a broken Monte Carlo estimator must trip the self-test exit code
        monkeypatch.setattr(cli.kl, "kl_monte_carlo",
                            lambda a, b, n, seed: (999.0, 1e-6))
        code = run(["kl-demo", "--mc-draws", "500", "--no-timestamp"])
        assert code == 4


class TestBiasCheck:
    def test_small_run(self, tmp_path, capsys):
        code = run(["bias-check", "--replicas", "400", "--dc", "3",
                    "--seed", "11", "--out", str(tmp_path),
                    "--no-timestamp"])
        assert code == 0
        payload = json.loads((tmp_path / "bias_check.json").read_text())
        assert payload["d_C"] == 3
        assert payload["n_replicas"] == 400
        assert payload["expected"] == 6.0
        assert payload["in_sample_chi2_max"] == 0.0
        assert abs(payload["z"]) <= 4.0
        assert payload["pass"] is True

    def test_bad_dc(self, capsys):
        code = run(["bias-check", "--dc", "0", "--replicas", "10"])
        assert code == 2
