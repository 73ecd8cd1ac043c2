"""Run configuration parsing and the command-line entry point."""

import json

import pytest

from src.config import (
    RunConfig,
    apply_overrides,
    build_config,
    load_toml,
    parse_config,
    reload_config,
)
from src.main import EXIT_COMPUTATION, EXIT_CONFIG, EXIT_OK, EXIT_OUTPUT, exit_code, main
from src.scenarios import ScenarioRegistry
from src.utils.errors import (
    ConfigError,
    ContractViolation,
    DressedPoleError,
    OutputError,
    ParameterError,
)

FAST_MEMORY = ["--set", "memory.grid_points=65", "--set", "memory.n_max=8"]


class TestRunConfig:
    def test_defaults(self):
        config = parse_config()
        assert config.seed == 7
        assert config.cloud.b0 == pytest.approx(10.0)
        assert config.mc.n_paths > 0
        assert config.scenario is None

    def test_b0_and_density_are_exclusive(self):
        with pytest.raises(ConfigError):
            parse_config(overrides=["cloud.b0=5", "cloud.n0_lambda3=0.1"])

    def test_negative_rabi_rejected_with_details(self):
        with pytest.raises(ConfigError) as info:
            parse_config(overrides=["control.rabi=-1"])
        paths = [path for path, _, _ in info.value.details]
        assert "control.rabi" in paths

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(overrides=["control.strength=2"])

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(overrides=['scenario="laser"'])

    def test_override_values_are_toml_literals(self):
        data = apply_overrides({}, ["control.rabi=2.5", "memory.fidelity_sweep=true", "scatter.directions=['X']", "name=plain"])
        assert data["control"]["rabi"] == 2.5
        assert data["memory"]["fidelity_sweep"] is True
        assert data["scatter"]["directions"] == ["X"]
        assert data["name"] == "plain"

    @pytest.mark.parametrize("bad", ["control.rabi", "=3", "seed.value=1"])
    def test_malformed_override(self, bad):
        base = {"seed": 3}
        with pytest.raises(ConfigError):
            apply_overrides(base, [bad])

    def test_overrides_win_over_file(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("seed = 3\n[control]\nrabi = 1.5\n")
        config = parse_config(path, ["control.rabi=2.0"])
        assert config.seed == 3
        assert config.control.rabi == pytest.approx(2.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_toml(tmp_path / "absent.toml")

    def test_broken_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("seed = = 3\n")
        with pytest.raises(ConfigError):
            load_toml(path)

    def test_echo_reads_back_equal(self):
        config = parse_config(overrides=["control.rabi=2.5", "seed=99", "memory.nbar=0.5", 'scenario="memory"'])
        echo = config.echo()
        assert json.loads(json.dumps(echo)) == echo
        assert build_config(echo) == config

    def test_config_is_frozen(self):
        config = RunConfig()
        with pytest.raises(Exception):
            config.seed = 1


class TestExitCodes:
    @pytest.mark.parametrize(
        "error, code",
        [
            (ConfigError("x"), EXIT_CONFIG),
            (ParameterError("x"), EXIT_CONFIG),
            (ContractViolation("x"), EXIT_CONFIG),
            (OutputError("x"), EXIT_OUTPUT),
            (DressedPoleError("x"), EXIT_COMPUTATION),
        ],
    )
    def test_mapping(self, error, code):
        assert exit_code(error) == code

    def test_unknown_scenario_class(self):
        with pytest.raises(ConfigError):
            ScenarioRegistry.get_scenario_class("laser")

    def test_registry_names(self):
        assert set(ScenarioRegistry.get_all_names()) == {"spectrum", "scatter", "diffuse", "memory"}

    def test_app_settings_follow_environment(self, monkeypatch):
        monkeypatch.setenv("COLDLIGHT_WORKERS", "3")
        monkeypatch.setenv("COLDLIGHT_OUTPUT_DIR", "elsewhere")
        try:
            app = reload_config()
            assert app.compute.workers == 3
            assert app.output.directory == "elsewhere"
        finally:
            monkeypatch.undo()
            reload_config()

    def test_register_scenario(self, monkeypatch):
        monkeypatch.setattr(ScenarioRegistry, "_scenarios", dict(ScenarioRegistry._scenarios))
        memory = ScenarioRegistry.get_scenario_class("memory")
        ScenarioRegistry.register("Readout", memory)
        assert ScenarioRegistry.get_scenario_class("readout") is memory


class TestCommandLine:
    def test_list_scenarios(self):
        assert main(["--list-scenarios"]) == EXIT_OK

    def test_scenario_required(self):
        assert main([]) == EXIT_CONFIG

    def test_zero_paths(self, tmp_path):
        assert main(["diffuse", "--paths", "0", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert not any(tmp_path.iterdir())

    def test_bad_override(self, tmp_path):
        assert main(["memory", "--set", "control.rabi=-1", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["memory", "--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_memory_run_writes_artifacts(self, tmp_path):
        out = tmp_path / "memory"
        assert main(["memory", "--fidelity-sweep", "--out", str(out), *FAST_MEMORY]) == EXIT_OK
        names = {p.name for p in out.iterdir()}
        assert {"wigner.csv", "photon_number.csv", "fidelity_sweep.csv", "anti_bunching.csv"} <= names
        assert {"summary.json", "manifest.json"} <= names

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scenario"] == "memory"
        assert manifest["config"]["memory"]["fidelity_sweep"] is True
        assert manifest["config"]["memory"]["grid_points"] == 65
        assert set(manifest["artifacts"]) == names - {"manifest.json"}

        header = (out / "wigner.csv").read_text().splitlines()
        assert header[0].startswith("# ")
        assert "x,p,W" in header

    def test_memory_run_is_reproducible(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            assert main(["memory", "--seed", "5", "--out", str(out), *FAST_MEMORY]) == EXIT_OK
        for path in first.glob("*.csv"):
            assert path.read_bytes() == (second / path.name).read_bytes()
        assert (first / "summary.json").read_bytes() == (second / "summary.json").read_bytes()

        a = json.loads((first / "manifest.json").read_text())
        b = json.loads((second / "manifest.json").read_text())
        assert a["config_sha256"] == b["config_sha256"]
        assert a["artifacts"] == b["artifacts"]
