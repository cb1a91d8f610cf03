import csv
import json

import pytest

from teamnet.cli import EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO, EXIT_OK, main

CONFIG = {
    "n_agents": 12, "n_skills": 3, "task_size": 2, "announce_interval": 2, "task_timeout": 6,
    "validity_threshold": 4, "batch_size": 1, "topology": {"kind": "ring_lattice", "k": 2},
    "adaptation_enabled": True, "total_ticks": 120, "seed": 1, "metrics_sample_every": 40,
}


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(CONFIG), encoding="utf-8")
    return p


def write(tmp_path, data, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data), encoding="utf-8")
    return p


def test_run(tmp_path, config_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_path), "--out", str(out)]) == EXIT_OK
    for name in ("events.jsonl", "metrics.csv", "report.json", "net_0.dot", "net_120.dot", "net_120.graphml"):
        assert (out / name).exists(), name


def test_validate_ok(config_path, capsys):
    assert main(["validate", "--config", str(config_path)]) == EXIT_OK


def test_validate_bad_interval(tmp_path, capsys):
    bad = write(tmp_path, dict(CONFIG, announce_interval=0))
    assert main(["validate", "--config", str(bad)]) == EXIT_CONFIG
    assert "announce_interval" in capsys.readouterr().err


def test_validate_matches_run(tmp_path):
    bad = write(tmp_path, dict(CONFIG, topology={"kind": "ring_lattice", "k": 3}))
    assert main(["validate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_missing_config_is_io_error(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == EXIT_IO


def test_unwritable_out_is_io_error(tmp_path, config_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", "--config", str(config_path), "--out", str(blocker / "x")]) == EXIT_IO


def test_invariant_exit_code(tmp_path, config_path, monkeypatch):
    from teamnet import cli
    from teamnet.errors import InvariantViolation

    def boom(*a, **k):
        raise InvariantViolation("broken", tick=3, phase="adapt")

    monkeypatch.setattr(cli, "run", boom)
    assert main(["run", "--config", str(config_path), "--out", str(tmp_path / "o")]) == EXIT_INVARIANT


def test_sweep(tmp_path, config_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_path), "--seeds", "1,2,3", "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir() if p.is_dir()) == ["seed_1", "seed_2", "seed_3"]
    rows = list(csv.DictReader(open(out / "summary.csv", encoding="utf-8")))
    assert [r["seed"] for r in rows] == ["1", "2", "3"]
    report = json.loads((out / "seed_2" / "report.json").read_text())
    assert float(rows[1]["success_rate"]) == report["report"]["success_rate"]
    assert int(rows[1]["rewires"]) == report["report"]["rewires_performed"]


def test_sweep_parallel_matches_serial(tmp_path, config_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", str(config_path), "--seeds", "4,5", "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--config", str(config_path), "--seeds", "4,5", "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()
    assert (a / "seed_5" / "events.jsonl").read_bytes() == (b / "seed_5" / "events.jsonl").read_bytes()


def test_compare(tmp_path, config_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(config_path), "--seeds", "1,2", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(open(out / "compare.csv", encoding="utf-8")))
    assert len(rows) == 2
    for r in rows:
        assert float(r["delta"]) == float(r["rate_on"]) - float(r["rate_off"])
    off = json.loads((out / "seed_1" / "off" / "report.json").read_text())
    assert off["report"]["rewires_performed"] == 0
    # both arms see the same task stream
    def announced(arm):
        lines = (out / "seed_1" / arm / "events.jsonl").read_text().splitlines()
        return [json.loads(l)["skills"] for l in lines if '"event":"announced"' in l]
    assert announced("on") == announced("off")
    init = [(out / "seed_1" / arm / "events.jsonl").read_text().splitlines()[0] for arm in ("on", "off")]
    assert init[0] == init[1]


def test_bad_seed_list(config_path, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--config", str(config_path), "--seeds", "1,x", "--out", str(tmp_path)])
    assert info.value.code == 2
