"""Config validation, report formats, exit codes, determinism."""

import json

import pytest

from mkdvlab.cli import (
    _COLUMNS,
    EXPERIMENTS,
    ConfigError,
    emit_config,
    list_experiments,
    main,
    validate_config,
)
from mkdvlab.estimates import ESTIMATE_IDS


def write_cfg(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_validate_config_unknown_keys():
    with pytest.raises(ConfigError):
        validate_config({"experiment": "solve", "grid": 64})
    with pytest.raises(ConfigError):
        validate_config({"experiment": "solve", "params": {"n_x": 64, "mode": "fast"}})
    with pytest.raises(ConfigError):
        validate_config({"experiment": "warp"})
    with pytest.raises(ConfigError):
        validate_config({"experiment": "solve", "seed": "three"})
    validate_config({"experiment": "solve", "params": {"n_x": 64}, "seed": 1})


def test_emit_config_round_trip():
    cfg = {"experiment": "probe", "params": {"estimate_id": "lemma1"}, "seed": 4}
    assert json.loads(emit_config(cfg)) == cfg


def test_catalog_lists_everything():
    text = list_experiments()
    for name in EXPERIMENTS:
        assert name in text
    for eid in ESTIMATE_IDS:
        assert eid in text
    assert len(ESTIMATE_IDS) == 11 and len(EXPERIMENTS) == 6
    assert main(["list"]) == 0


def test_exit_code_zero_and_report_files(tmp_path):
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "experiment": "probe",
            "params": {"estimate_id": "lemma1", "count": 2, "grid_ns": [64, 128]},
        },
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    csv_text = (out / "report.csv").read_bytes()
    assert csv_text.splitlines()[0].decode() == ",".join(_COLUMNS["probe"])
    rep = json.loads((out / "report.json").read_text())
    assert rep["experiment"] == "probe"
    assert rep["rows"][0]["verdict"] == "PASS"


def test_exit_code_one_on_failed_verdict(tmp_path):
    # the wide-band free-flow probe at r = 1.2 is expected to fail
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "experiment": "probe",
            "params": {"estimate_id": "fs20", "r": 1.2, "count": 2},
        },
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 1
    rep = json.loads((out / "report.json").read_text())
    assert rep["payload"]["verdict"] == "FAIL"


def test_exit_code_two_on_config_error(tmp_path):
    bad = write_cfg(tmp_path, "bad.json", {"experiment": "solve", "bogus": 1})
    assert main(["run", bad]) == 2
    missing = str(tmp_path / "nope.json")
    assert main(["run", missing]) == 2


def test_exit_code_three_on_hypothesis_rejection(tmp_path):
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {"experiment": "probe", "params": {"estimate_id": "theorem2", "r": 3.0}},
    )
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 3


def test_csv_is_byte_identical_across_runs(tmp_path):
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "experiment": "probe",
            "seed": 7,
            "params": {"estimate_id": "cor_b1", "count": 2, "grid_ns": [64, 128]},
        },
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", cfg, "--out", str(out)]) == 0
        outs.append((out / "report.csv").read_bytes())
    assert outs[0] == outs[1]
    assert b"\r\n" in outs[0]


def test_override_and_grid_n_flags(tmp_path):
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {"experiment": "solve", "params": {"delta": 0.05}},
    )
    out = tmp_path / "out"
    rc = main(
        [
            "run",
            cfg,
            "--out",
            str(out),
            "--grid-n",
            "64",
            "--override",
            "amplitude=0.2",
            "--override",
            "delta=0.1",
        ]
    )
    assert rc == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["params"]["n_x"] == 64
    assert rep["config"]["params"]["amplitude"] == 0.2
    assert rep["rows"][0]["delta"] == 0.1
    # unknown override keys are still rejected
    assert main(["run", cfg, "--override", "bogus=1"]) == 2


def test_exponents_and_norm_suite_run(tmp_path):
    for exp, params in (
        ("exponents", {"r_values": [1.5, 2.0]}),
        ("norm-suite", {"grid_n": 64}),
        ("resonant-integral", {"xis": [8.0, 16.0], "n": 256}),
    ):
        cfg = write_cfg(tmp_path, f"{exp}.json", {"experiment": exp, "params": params})
        out = tmp_path / exp
        assert main(["run", cfg, "--out", str(out)]) == 0
        header = (out / "report.csv").read_text().splitlines()[0]
        assert header == ",".join(_COLUMNS[exp])
