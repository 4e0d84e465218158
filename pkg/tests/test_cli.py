import json

import numpy as np
import pytest

from ivbounds.cli import main
from ivbounds.simulation import gen_illustration


def write_illustration_csv(path, n=800, seed=0):
    d = gen_illustration(n, seed)
    lines = ["x1,x2,z,a,y"]
    for i in range(d.n):
        lines.append(f"{d.x[i,0]:.6f},{d.x[i,1]:.6f},{d.z[i]},{d.a[i]},{int(d.y[i])}")
    path.write_text("\n".join(lines) + "\n")
    return path


BOUNDS_ARGS = ["--covariates", "x1,x2", "--instrument", "z",
               "--exposure", "a", "--outcome", "y"]


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out)


class TestBoundsCommand:
    def test_direct_end_to_end(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv")
        rc, report = run_json(capsys, [
            "bounds", str(csv), *BOUNDS_ARGS,
            "--method", "direct", "--folds", "3", "--seed", "7",
            "--learner-lambda", "known:0.5"])
        assert rc == 0
        assert report["schema_version"] == 1
        assert report["n"] == 800
        assert report["interval"]["lo"] <= report["lower"]
        assert report["upper"] <= report["interval"]["hi"]
        assert sum(report["selection_frequencies"]["lower"]) == pytest.approx(1.0)
        assert report["config"]["seed"] == 7

    def test_seed_determinism(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv")
        argv = ["bounds", str(csv), *BOUNDS_ARGS, "--seed", "3", "--folds", "3"]
        _, a = run_json(capsys, argv)
        _, b = run_json(capsys, argv)
        assert a == b

    def test_lse_records_temperature_and_pad(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv", n=3010, seed=1)
        rc, report = run_json(capsys, [
            "bounds", str(csv), *BOUNDS_ARGS, "--method", "lse",
            "--folds", "3", "--learner-lambda", "known:0.5"])
        assert rc == 0
        t = report["method_metadata"]["t"]
        assert t == pytest.approx(100 * 3010 ** 0.25)
        assert t == pytest.approx(740.7, abs=0.1)
        pad = np.log(8) / t
        assert pad == pytest.approx(0.00281, abs=1e-5)
        # the conservative interval is wider than the Wald one by the pad
        z = 1.959963984540054
        se_l = np.sqrt(report["var_lower"] / report["n"])
        assert report["interval"]["lo"] == pytest.approx(
            report["lower"] - pad - z * se_l, abs=1e-10)

    def test_weighted_run_differs(self, tmp_path, capsys):
        d = gen_illustration(600, 2)
        lines = ["x1,x2,z,a,y,wt"]
        rng = np.random.default_rng(0)
        wts = rng.integers(1, 5, d.n)
        for i in range(d.n):
            lines.append(f"{d.x[i,0]:.6f},{d.x[i,1]:.6f},{d.z[i]},{d.a[i]},"
                         f"{int(d.y[i])},{wts[i]}")
        csv = tmp_path / "w.csv"
        csv.write_text("\n".join(lines) + "\n")
        argv = ["bounds", str(csv), *BOUNDS_ARGS, "--folds", "3", "--seed", "1"]
        _, plain = run_json(capsys, argv)
        _, weighted = run_json(capsys, argv + ["--weights-col", "wt"])
        assert weighted["lower"] != pytest.approx(plain["lower"], abs=1e-12)

    def test_continuous_method(self, tmp_path, capsys):
        d = gen_illustration(400, 3)
        rng = np.random.default_rng(1)
        lines = ["x1,x2,z,a,y"]
        for i in range(d.n):
            yc = 2.0 * d.y[i] + rng.random()  # bounded continuous outcome
            lines.append(f"{d.x[i,0]:.6f},{d.x[i,1]:.6f},{d.z[i]},{d.a[i]},{yc:.5f}")
        csv = tmp_path / "c.csv"
        csv.write_text("\n".join(lines) + "\n")
        rc, report = run_json(capsys, [
            "bounds", str(csv), *BOUNDS_ARGS, "--method", "continuous",
            "--m", "5", "--folds", "3", "--seed", "2",
            "--learner-lambda", "known:0.5"])
        assert rc == 0
        assert report["method"] == "continuous-direct"
        assert report["method_metadata"]["m"] == 5

    def test_clamp_flag(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv", n=200)
        rc, report = run_json(capsys, [
            "bounds", str(csv), *BOUNDS_ARGS, "--folds", "3", "--clamp"])
        assert rc == 0
        assert -1.0 <= report["interval"]["lo"] and report["interval"]["hi"] <= 1.0

    def test_t_flag_validation(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv", n=200)
        rc = main(["bounds", str(csv), *BOUNDS_ARGS, "--t", "50"])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "invalid-config"

    def test_load_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x1,x2,z,a,y\n0,0,2,0,0\n")
        rc = main(["bounds", str(bad), *BOUNDS_ARGS])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "non-binary"

    def test_output_file(self, tmp_path, capsys):
        csv = write_illustration_csv(tmp_path / "d.csv", n=300)
        out = tmp_path / "report.json"
        rc = main(["bounds", str(csv), *BOUNDS_ARGS, "--folds", "3",
                   "--output", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["n"] == 300


class TestOtherCommands:
    def test_simulate_emits_json_and_csv(self, tmp_path, capsys):
        out_csv = tmp_path / "grid.csv"
        rc, payload = run_json(capsys, [
            "simulate", "--n-grid", "500", "--r-grid", "0.3", "--reps", "5",
            "--csv", str(out_csv)])
        assert rc == 0
        assert payload["rows"][0]["n"] == 500
        header = out_csv.read_text().splitlines()[0]
        assert "rmse_lower_direct" in header

    def test_illustrate_reports_truth(self, capsys):
        rc, payload = run_json(capsys, ["illustrate", "--n", "1000", "--folds", "3"])
        assert rc == 0
        assert payload["truth"]["ate"] == pytest.approx(0.11725, abs=5e-4)
        assert set(payload["population_bounds_by_adjustment"]) == {
            "none", "x2_only", "full"}

    def test_check_passes(self, capsys):
        rc = main(["check", "--laws", "50"])
        payload = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert payload["ok"] is True
        assert payload["max_lp_gap"] < 1e-8
