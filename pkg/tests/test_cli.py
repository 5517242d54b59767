import numpy as np
import pytest

from hcran import cli, harness, verify


def test_simulate_writes_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("HCRAN_SLOTS", "120")
    out = tmp_path / "run"
    code = cli.main(["simulate", "--seed", "1", "--v", "30", "--lambda", "2.0",
                     "--out", str(out)])
    assert code == 0
    rows = harness.read_summary_csv(str(out / "summary.csv"))
    assert len(rows) == 1 and rows[0].slots == 120
    assert (out / "trace.csv").exists()


def test_sweep_command(tmp_path, monkeypatch):
    monkeypatch.delenv("HCRAN_SLOTS", raising=False)
    out = tmp_path / "sweep"
    code = cli.main(["sweep", "--v-list", "10,20", "--lambda-list", "2.0",
                     "--seeds", "1", "--slots", "100", "--out", str(out)])
    assert code == 0
    rows = harness.read_summary_csv(str(out / "sweep.csv"))
    assert sorted({r.v for r in rows}) == [10.0, 20.0]


def test_compare_fronthaul_command(tmp_path):
    out = tmp_path / "cmp"
    code = cli.main(["compare-fronthaul", "--cap", "6", "--v-list", "20",
                     "--lambda", "2.0", "--seeds", "1", "--slots", "100",
                     "--out", str(out)])
    assert code == 0
    rows = harness.read_summary_csv(str(out / "fronthaul_compare.csv"))
    caps = sorted({r.fronthaul_cap for r in rows})
    assert caps[0] == 6.0 and np.isinf(caps[1])


def test_config_file_feeds_cli(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("slots = 100\ntradeoff = 25\nlambda = 1.5\n", encoding="utf-8")
    out = tmp_path / "run"
    code = cli.main(["simulate", "--config", str(cfg), "--seed", "0", "--out", str(out)])
    assert code == 0
    rows = harness.read_summary_csv(str(out / "summary.csv"))
    assert rows[0].slots == 100 and rows[0].v == 25.0 and rows[0].lam == 1.5


def test_verify_suite_passes():
    assert verify.run_all(verbose=False) == 0
