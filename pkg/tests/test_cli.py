import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rotom.centroidal import centroidal_state
from rotom.cli import SCHEMA_VERSION, main
from rotom.reference import preset
from rotom.transmissibility import transmissibility_index

EXIT_SCHEMA, EXIT_ZERO_FORCE, EXIT_SINGULAR, EXIT_DEGENERATE = 2, 3, 4, 5


def vec(*xs) -> str:
    return ",".join(repr(float(x)) for x in xs)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    record = json.loads(out)
    assert record["schema_version"] == SCHEMA_VERSION
    return record


def run_csv(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "csv")
    assert code == 0, err
    rows = list(csv.reader(io.StringIO(out)))
    return rows[0], np.array(rows[1:], dtype=float)


class TestDescribe:
    def test_pendulum(self, capsys):
        rec = run_json(capsys, "describe", "preset:pendulum")
        assert rec["results"]["summary"] == "1 joint, total mass 1 kg, task_dim 2"

    def test_double_pendulum(self, capsys):
        rec = run_json(capsys, "describe", "preset:double_pendulum")
        assert rec["results"]["summary"].startswith("2 joints, total mass 2 kg")

    def test_file_path(self, capsys, tmp_path):
        from rotom.robotfile import dumps_model
        path = tmp_path / "arm.json"
        path.write_text(dumps_model(preset("arm4dof")))
        rec = run_json(capsys, "describe", path)
        assert rec["results"]["joints"] == 4
        assert rec["results"]["limits"][3] == [0.0, 2.6]

    def test_unknown_key(self, capsys, tmp_path):
        from rotom.robotfile import model_to_dict
        data = model_to_dict(preset("pendulum"))
        data["links"][0]["colour"] = "blue"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        code, _, err = run(capsys, "describe", path)
        assert code == EXIT_SCHEMA
        assert "colour" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "describe", tmp_path / "nope.json")[0] == EXIT_SCHEMA


class TestEval:
    def test_force_along_rod(self, capsys):
        rec = run_json(capsys, "eval", "preset:pendulum", "--q", 0.5236,
                       "--force", vec(np.cos(0.5236), np.sin(0.5236)))
        assert rec["results"]["rotom"] == pytest.approx(0.0, abs=1e-12)

    def test_force_across_rod(self, capsys):
        rec = run_json(capsys, "eval", "preset:pendulum", "--q", 30, "--degrees",
                       "--force", vec(np.cos(np.radians(120)), np.sin(np.radians(120))))
        assert rec["results"]["rotom"] == pytest.approx(1.0, abs=1e-12)

    def test_forty_five_degrees(self, capsys):
        rec = run_json(capsys, "eval", "preset:pendulum", "--q", 0, "--force", "0.7071067811865476,0.7071067811865476")
        res = rec["results"]
        assert res["rotom"] == pytest.approx(0.70711, abs=1e-5)
        np.testing.assert_allclose(np.array(res["reaction"]), np.array(res["f"]) - [0.7071067811865476] * 2)
        assert set(res) >= {"rotom", "f", "reaction", "accel", "com"}

    def test_csv(self, capsys):
        header, rows = run_csv(capsys, "eval", "preset:double_pendulum", "--q", "0.1,0.2", "--force", "0,-1")
        assert header[0] == "rotom" and "com_y" in header
        assert rows.shape == (1, len(header))

    def test_zero_force(self, capsys):
        assert run(capsys, "eval", "preset:pendulum", "--q", 0, "--force", "0,0")[0] == EXIT_ZERO_FORCE

    def test_dimension_mismatch(self, capsys):
        assert run(capsys, "eval", "preset:pendulum", "--q", "0,1", "--force", "1,0")[0] == EXIT_SCHEMA

    def test_singular_mass_matrix(self, capsys, tmp_path):
        # all mass on the joint axis
        data = {"name": "rod", "task_dim": 3, "joints": [{"axis": [0, 0, 1], "origin": [0, 0, 0]}],
                "links": [{"mass": 1.0, "com": [0, 0, 1]}]}
        path = tmp_path / "rod.json"
        path.write_text(json.dumps(data))
        assert run(capsys, "eval", path, "--q", 0, "--force", "1,0,0")[0] == EXIT_SINGULAR

    def test_joint_limit(self, capsys):
        assert run(capsys, "eval", "preset:arm4dof", "--q", "0,2,0,1", "--force", "1,0,0")[0] == EXIT_SCHEMA

    def test_bad_usage(self, capsys):
        assert run(capsys, "eval", "preset:pendulum")[0] == EXIT_SCHEMA


class TestEllipsoid:
    def test_pendulum(self, capsys):
        res = run_json(capsys, "ellipsoid", "preset:pendulum", "--q", 1.234)["results"]
        np.testing.assert_allclose(res["eigenvalues"], [1.0, 0.0], atol=1e-15)
        assert res["index"] == pytest.approx(0.0, abs=1e-15)

    def test_index_matches_library_exactly(self, capsys):
        q = [0.0, np.pi / 2]
        res = run_json(capsys, "ellipsoid", "preset:double_pendulum", "--q", vec(*q))["results"]
        assert res["index"] == transmissibility_index(centroidal_state(preset("double_pendulum"), q))

    def test_samples(self, capsys):
        res = run_json(capsys, "ellipsoid", "preset:double_pendulum", "--q", "0.3,1.0", "--samples", 64)["results"]
        assert len(res["boundary"]) == 64

    def test_samples_csv(self, capsys):
        header, rows = run_csv(capsys, "ellipsoid", "preset:double_pendulum", "--q", "0.3,1.0", "--samples", 64)
        assert header == ["x", "y"] and rows.shape == (64, 2)

    def test_too_few_samples(self, capsys):
        assert run(capsys, "ellipsoid", "preset:pendulum", "--q", 0, "--samples", 4)[0] == EXIT_SCHEMA

    def test_degenerate(self, capsys, tmp_path):
        # mass on the joint axis: rotational inertia keeps M regular but the CoM cannot move
        data = {"name": "spinner", "task_dim": 3, "joints": [{"axis": [0, 0, 1], "origin": [0, 0, 0]}],
                "links": [{"mass": 1.0, "com": [0, 0, 1], "inertia": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]}
        path = tmp_path / "spinner.json"
        path.write_text(json.dumps(data))
        assert run(capsys, "ellipsoid", path, "--q", 0)[0] == EXIT_DEGENERATE


class TestSweep:
    def test_index_constant_in_first_joint(self, capsys):
        header, rows = run_csv(capsys, "sweep", "preset:double_pendulum", "--joint", 1, "--range", "0:6.2832:32",
                               "--q", "0,1.1", "--index")
        assert header == ["q1", "index"]
        assert np.ptp(rows[:, 1]) < 1e-10

    def test_pendulum_rotom_column(self, capsys):
        alpha = 0.8
        header, rows = run_csv(capsys, "sweep", "preset:pendulum", "--joint", 1, "--range", "-3:3:61",
                               "--force", vec(np.cos(alpha), np.sin(alpha)))
        np.testing.assert_allclose(rows[:, 1], np.abs(np.sin(alpha - rows[:, 0])), atol=1e-12)

    def test_row_count(self, capsys):
        _, rows = run_csv(capsys, "sweep", "preset:pendulum", "--joint", 1, "--range", "0:6.2832:25",
                          "--force", "1,0")
        assert len(rows) == 25

    def test_two_joint_grid(self, capsys):
        header, rows = run_csv(capsys, "sweep", "preset:double_pendulum", "--joint", 1, "--joint", 2,
                               "--range", "0:1:3", "--range", "0.5:2:4", "--index")
        assert header == ["q1", "q2", "index"]
        assert len(rows) == 12
        np.testing.assert_allclose(rows[:4, 1], np.linspace(0.5, 2, 4))

    def test_needs_force_or_index(self, capsys):
        argv = ["sweep", "preset:pendulum", "--joint", 1, "--range", "0:1:3"]
        assert run(capsys, *argv)[0] == EXIT_SCHEMA
        assert run(capsys, *argv, "--index", "--force", "1,0")[0] == EXIT_SCHEMA

    def test_zero_force(self, capsys):
        code = run(capsys, "sweep", "preset:pendulum", "--joint", 1, "--range", "0:1:3", "--force", "0,0")[0]
        assert code == EXIT_ZERO_FORCE


class TestMinimize:
    def test_pendulum(self, capsys):
        alpha = 0.5
        res = run_json(capsys, "minimize", "preset:pendulum", "--q0", alpha + 1.0,
                       "--force", vec(np.cos(alpha), np.sin(alpha)))["results"]
        assert res["converged"]
        d = (res["final_q"][0] - alpha) % np.pi
        assert min(d, np.pi - d) < 1e-4
        obj = [row["objective"] for row in res["trace"]]
        assert np.all(np.diff(obj) < 0)

    def test_already_at_zero(self, capsys):
        header, rows = run_csv(capsys, "minimize", "preset:pendulum", "--q0", 0, "--force", "1,0")
        assert header == ["iter", "q1", "objective"] and len(rows) == 1

    def test_double_pendulum_gravity(self, capsys):
        res = run_json(capsys, "minimize", "preset:double_pendulum", "--q0", "0.3,0.4", "--force", "0,-1",
                       "--max-iters", 500)["results"]
        obj = np.array([row["objective"] for row in res["trace"]])
        assert obj[-1] <= obj[0] and np.all(np.diff(obj) < 0)


class TestZeros:
    def test_pendulum_two(self, capsys):
        alpha = 1.0
        res = run_json(capsys, "zeros", "preset:pendulum", "--force", vec(np.cos(alpha), np.sin(alpha)))
        qs = sorted(s["q"][0] for s in res["results"]["solutions"])
        assert len(qs) == 2 and qs[1] - qs[0] == pytest.approx(np.pi, abs=1e-8)

    def test_limited_pendulum_one(self, capsys, tmp_path):
        from rotom.robotfile import model_to_dict
        alpha = 1.0
        data = model_to_dict(preset("pendulum"))
        data["joints"][0]["limits"] = [alpha - 0.5, alpha + 0.5]
        path = tmp_path / "limited.json"
        path.write_text(json.dumps(data))
        res = run_json(capsys, "zeros", path, "--force", vec(np.cos(alpha), np.sin(alpha)))
        assert len(res["results"]["solutions"]) == 1

    def test_double_pendulum_residuals(self, capsys):
        res = run_json(capsys, "zeros", "preset:double_pendulum", "--force", "0,-1", "--seed-diagnostics")
        sols = res["results"]["solutions"]
        assert sols and all(s["residual"] < 1e-10 for s in sols)
        assert len(res["results"]["seeds"]) == 64

    def test_empty_has_diagnostic(self, capsys, tmp_path):
        from rotom.robotfile import model_to_dict
        data = model_to_dict(preset("pendulum"))
        data["joints"][0]["limits"] = [0.2, 0.6]
        path = tmp_path / "limited.json"
        path.write_text(json.dumps(data))
        rec = run_json(capsys, "zeros", path, "--force", "0.5403023058681398,0.8414709848078965")
        assert rec["results"]["solutions"] == [] and rec["diagnostics"]


def test_out_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    code, stdout, _ = run(capsys, "describe", "preset:pendulum", "--out", out)
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["command"] == "describe"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rotom.cli", "describe", "preset:pendulum", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "joints,links,total_mass,task_dim"
