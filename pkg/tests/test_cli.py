import json

import pytest
import yaml

from socialfabric.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main


def test_validate(scenario_dir, capsys):
    assert main(["validate", str(scenario_dir / "scenario.yaml")]) == EXIT_OK
    assert "config OK" in capsys.readouterr().out


def test_invalid_config_exit_code(scenario_dir, capsys):
    raw = yaml.safe_load((scenario_dir / "scenario.yaml").read_text())
    raw["mesh"]["buffer_m"] = 100000
    bad = scenario_dir / "bad.yaml"
    bad.write_text(yaml.safe_dump(raw))
    assert main(["validate", str(bad)]) == EXIT_VALIDATION
    assert "error [config]" in capsys.readouterr().err
    assert main(["--override-buffer-check", "validate", str(bad)]) == EXIT_OK


def test_missing_raster_is_runtime_error(scenario_dir, capsys):
    (scenario_dir / "gdp.tif").unlink()
    code = main(["run", str(scenario_dir / "scenario.yaml"), "-o", str(scenario_dir / "o")])
    assert code in (EXIT_VALIDATION, EXIT_RUNTIME)
    assert "error" in capsys.readouterr().err


def test_run_and_compare(scenario_dir, capsys):
    cfg = str(scenario_dir / "scenario.yaml")
    a, b = scenario_dir / "a", scenario_dir / "b"
    assert main(["--threads", "1", "run", cfg, "-o", str(a)]) == EXIT_OK
    assert (a / "metrics.json").exists()
    assert main(["run", cfg, "-o", str(b)]) == EXIT_OK
    capsys.readouterr()
    assert main(["compare", str(a), str(b), "-o", str(scenario_dir / "cmp")]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["max_abs_difference_m"] == 0.0
    assert doc["a"]["config_hash"] == doc["b"]["config_hash"]
    assert (scenario_dir / "cmp" / "difference.csv").exists()


def test_fabric_and_forces(scenario_dir, capsys):
    cfg = str(scenario_dir / "scenario.yaml")
    assert main(["fabric", cfg, "-o", str(scenario_dir / "f")]) == EXIT_OK
    assert main(["forces", cfg, "-o", str(scenario_dir / "g")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "forces ->" in out
    assert (scenario_dir / "g" / "forces.csv").read_text().count("\n") >= 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
