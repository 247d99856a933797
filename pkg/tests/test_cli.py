import json

import numpy as np
import pytest

from dcprox.bench import read_summary_csv, read_trace_csv
from dcprox.cli import main
from dcprox.datasets import load_dataset_json
from dcprox.logreg import build_logreg_problem
from dcprox.poisson import build_poisson_problem


def _write_config(path, **over):
    cfg = {
        "problem": {"kind": "logreg-synthetic", "m": 40, "n": 8,
                    "lambda": 0.01, "data_seed": 0},
        "solvers": [{"name": "spdcae1"}],
        "tolerances": [1e-1, 1e-2],
        "seeds": [0],
        "max_iter": 300,
        "reference_iterations": 1500,
    }
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return path


def test_gen_writes_usable_logreg_dataset(tmp_path, capsys):
    out = tmp_path / "data.json"
    rc = main(["gen", "--kind", "logreg-synthetic", "--m", "20", "--n", "6",
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    assert "wrote" in capsys.readouterr().out
    kind, data, truth, params = load_dataset_json(out)
    assert kind == "logreg"
    assert params["seed"] == 3
    prob = build_logreg_problem(data)
    assert np.isfinite(prob.f.eval(np.zeros(6)))


def test_gen_writes_usable_poisson_dataset(tmp_path):
    out = tmp_path / "counts.json"
    rc = main(["gen", "--kind", "poisson-synthetic", "--m", "10", "--n", "30",
               "--k-nonzeros", "4", "--amp-max", "100", "--out", str(out)])
    assert rc == 0
    kind, data, truth, params = load_dataset_json(out)
    assert kind == "poisson-cs"
    prob = build_poisson_problem(data)
    assert np.isfinite(prob.f.eval(np.ones(30)))


def test_ref_prints_value_and_writes_json(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json")
    out = tmp_path / "ref.json"
    rc = main(["ref", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    printed = float(capsys.readouterr().out.strip())
    stored = json.loads(out.read_text())["reference"]
    assert printed == stored


def test_bench_writes_outputs_and_prints_rows(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json")
    out_dir = tmp_path / "runs"
    rc = main(["bench", "--config", str(cfg), "--out", str(out_dir)])
    assert rc == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
    assert len(lines) == 2  # one solver, two tolerances
    assert all("spdcae1" in l for l in lines)
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert read_trace_csv(out_dir / "trace_spdcae1_0.csv")


def test_bench_tol_and_seed_overrides(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json")
    out_dir = tmp_path / "runs"
    rc = main(["bench", "--config", str(cfg), "--out", str(out_dir),
               "--tol", "0.5", "--tol", "0.05", "--seed", "2", "--seed", "7",
               "--max-iter", "150"])
    assert rc == 0
    rows = read_summary_csv(out_dir / "summary.csv")
    assert sorted({r.tol for r in rows}, reverse=True) == [0.5, 0.05]
    assert (out_dir / "trace_spdcae1_7.csv").exists()
    trace = read_trace_csv(out_dir / "trace_spdcae1_2.csv")
    assert trace[-1].k <= 150


def test_check_passes_on_real_outputs(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json")
    out_dir = tmp_path / "runs"
    assert main(["bench", "--config", str(cfg), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    rc = main(["check", "--trace", str(out_dir / "trace_spdcae1_0.csv"),
               "--summary", str(out_dir / "summary.csv")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "iteration-counter-increasing ok" in out
    assert "objective-finite ok" in out
    assert "step-size-consistent ok" in out
    assert "backtrack-count-nonnegative ok" in out
    assert "first-hit-monotone ok" in out


def test_check_flags_corrupted_trace(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json")
    out_dir = tmp_path / "runs"
    assert main(["bench", "--config", str(cfg), "--out", str(out_dir)]) == 0
    path = out_dir / "trace_spdcae1_0.csv"
    rows = path.read_text().splitlines()
    parts = rows[1].split(",")
    parts[5] = "-2"  # backtracks column
    rows[1] = ",".join(parts)
    path.write_text("\n".join(rows) + "\n")
    capsys.readouterr()
    rc = main(["check", "--trace", str(path)])
    assert rc == 3
    assert "negative backtrack count" in capsys.readouterr().err


def test_check_flags_nonmonotone_summary(tmp_path, capsys):
    path = tmp_path / "summary.csv"
    path.write_text(
        "solver,tol,mean_iterations,mean_seconds,hit_rate,max_flag\n"
        "spdcae1,0.1,50.0,0.1,1.0,0\n"
        "spdcae1,0.01,30.0,0.05,1.0,0\n")
    rc = main(["check", "--summary", str(path)])
    assert rc == 3
    assert "first-hit" in capsys.readouterr().err


def test_check_without_inputs_is_config_error(capsys):
    assert main(["check"]) == 2


def test_bad_json_config_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["ref", "--config", str(cfg)]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_config_file_is_config_error(tmp_path, capsys):
    assert main(["bench", "--config", str(tmp_path / "nope.json")]) == 2


def test_config_missing_keys_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": {"kind": "logreg-synthetic"}}))
    assert main(["ref", "--config", str(cfg)]) == 2
    assert "missing configuration keys" in capsys.readouterr().err


def test_unknown_subcommand_exits_2(capsys):
    assert main(["tune"]) == 2
