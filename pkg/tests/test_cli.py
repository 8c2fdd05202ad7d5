import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bargmann.cli import build_state, main, parse_mode, set_axis
from bargmann.fock import MixedState, PureState
from bargmann.protocol import EXACT

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def photon(t):
    return {"kind": "single_photon", "angle": t}


def test_hom_identical_validates(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0)], "mode": "exact"}
    out = tmp_path / "out"
    assert main(["validate", write(tmp_path, cfg), "--out", str(out)]) == 0
    result = json.loads((out / "result.json").read_text())
    assert result["overlap"] == pytest.approx(1.0)
    val = json.loads((out / "validation.json").read_text())
    assert set(val) >= {"protocol_value", "oracle_value", "abs_error"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) >= {"config_hash", "seed", "tool_version", "wall_time"}


def test_trace_sampled_records_n(tmp_path):
    cfg = {"experiment": "trace",
           "states": [{"kind": "random_pure", "d": 2, "photons": 1, "seed": s} for s in range(3)],
           "mode": {"kind": "sampled", "epsilon": 0.05, "delta": 0.05}, "seed": 2}
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, cfg), "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["N"] == 738
    assert json.loads((out / "result.json").read_text())["N"] == 738


def test_suppression_distinguishable(tmp_path):
    cfg = {"experiment": "suppression", "states": [photon(0), photon(math.pi / 2)],
           "validate": True}
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, cfg), "--out", str(out)]) == 0
    result = json.loads((out / "result.json").read_text())
    assert result["is_symmetric"] is False
    assert result["P0"] == pytest.approx(0.5)


def test_kernel_writes_csv(tmp_path):
    cfg = {"experiment": "kernel", "states": [photon(0), photon(0.5), photon(1.0)],
           "params": {"ids": ["a", "b", "c"]}}
    out = tmp_path / "out"
    assert main(["validate", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = list(csv.reader((out / "kernel.csv").open()))
    assert rows[0] == ["", "a", "b", "c"]
    assert float(rows[1][2]) == pytest.approx(math.cos(0.5) ** 2)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(tmp_path, path):
    assert main(["validate", str(path), "--out", str(tmp_path / "out")]) == 0


def test_seed_override_changes_output(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0.7)],
           "mode": {"kind": "sampled", "N": 400}, "seed": 1}
    path = write(tmp_path, cfg)
    main(["run", path, "--out", str(tmp_path / "a")])
    main(["run", path, "--out", str(tmp_path / "b"), "--seed", "2"])
    a = (tmp_path / "a" / "result.json").read_text()
    b = (tmp_path / "b" / "result.json").read_text()
    assert a != b


def test_validation_failure_status(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0.7)],
           "mode": {"kind": "sampled", "N": 50}, "seed": 1}
    assert main(["validate", write(tmp_path, cfg), "--out", str(tmp_path / "o"),
                 "--tolerance", "1e-12"]) == 4


@pytest.mark.parametrize("cfg", [
    {"experiment": "nope", "states": [photon(0), photon(0)]},
    {"experiment": "hom", "states": [photon(0)]},
    {"experiment": "hom", "states": [photon(0), photon(0)], "mode": {"kind": "sampled"}},
    {"experiment": "hom", "states": [photon(0), photon(0)],
     "mode": {"kind": "sampled", "N": 10, "epsilon": 0.1}},
    {"experiment": "hom", "states": [{"kind": "unicorn"}, photon(0)]},
])
def test_config_errors(tmp_path, cfg):
    assert main(["run", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2


def test_unparseable_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 2


def test_capacity_error(tmp_path, monkeypatch):
    monkeypatch.setenv("BARGMANN_SECTOR_CAP", "2")
    cfg = {"experiment": "trace", "states": [photon(0), photon(0.2), photon(0.4)]}
    assert main(["run", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 3


def test_sweep_hom_angle(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0)], "mode": "exact"}
    out = tmp_path / "sw"
    values = [0, 0.4, 0.8, 1.2, 1.5707963267948966]
    status = main(["sweep", write(tmp_path, cfg), "--axis", "states.1.angle",
                   "--values", ",".join(map(str, values)), "--out", str(out)])
    assert status == 0
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert [float(r["states.1.angle"]) for r in rows] == values
    for r, t in zip(rows, values):
        assert float(r["estimate_re"]) == pytest.approx(math.cos(t) ** 2, abs=1e-12)
        assert float(r["abs_error"]) < 1e-12


def test_sweep_empty_axis(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0)]}
    assert main(["sweep", write(tmp_path, cfg), "--axis", "N", "--values", "",
                 "--out", str(tmp_path / "o")]) == 2


def test_missing_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_set_axis():
    cfg = {"mode": {"kind": "sampled", "epsilon": 0.1}, "states": [{"angle": 0}]}
    assert set_axis(cfg, "N", 100)["mode"] == {"kind": "sampled", "N": 100}
    assert set_axis(cfg, "states.0.angle", 0.5)["states"][0]["angle"] == 0.5
    assert cfg["states"][0]["angle"] == 0


def test_parse_mode():
    assert parse_mode("exact", 0) == EXACT
    assert parse_mode({"kind": "sampled", "epsilon": 0.05, "delta": 0.05}, 3).shots == 738


@pytest.mark.parametrize("spec, cls", [
    ({"kind": "single_photon", "amplitudes": [1, [0, 1]]}, PureState),
    ({"kind": "dual_rail", "theta": 0.3, "phi": 0.1}, PureState),
    ({"kind": "coherent", "beta": [0.3, 0.1], "cutoff": 10}, PureState),
    ({"kind": "fock", "occupations": [1, 1]}, PureState),
    ({"kind": "vacuum", "d": 2}, PureState),
    ({"kind": "random_pure", "d": 2, "photons": [0, 1], "seed": 1}, PureState),
    ({"kind": "mixture", "components": [
        {"weight": 0.5, "state": {"kind": "fock", "occupations": [1, 0]}},
        {"weight": 0.5, "state": {"kind": "fock", "occupations": [0, 1]}}]}, MixedState),
    ({"layout": {"M": 1, "d": 1}, "amplitudes": [{"occupations": [1], "re": 1.0}]}, PureState),
])
def test_build_state(spec, cls):
    assert isinstance(build_state(spec), cls)


def test_module_entry_point(tmp_path):
    cfg = {"experiment": "hom", "states": [photon(0), photon(0)]}
    proc = subprocess.run([sys.executable, "-m", "bargmann", "run", write(tmp_path, cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
