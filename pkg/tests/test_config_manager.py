import json

import pytest

from multireference_alignment.models.options import EmOptions, LsOptions, SpectralOptions, build_options
from multireference_alignment.utils.config_manager import DEFAULT_CONFIG, ConfigManager, get_config
from multireference_alignment.utils.errors import ConfigError


class TestLoading:
    def test_defaults_without_file(self):
        config = ConfigManager()
        assert config.config == DEFAULT_CONFIG
        assert config.config is not DEFAULT_CONFIG

    def test_missing_file_gives_defaults(self, tmp_path):
        assert ConfigManager(str(tmp_path / "absent.json")).get("em_settings.max_iters") == 500

    def test_json_is_merged_over_defaults(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"em_settings": {"max_iters": 25}, "extra": {"flag": 1}}), encoding="utf-8")
        config = ConfigManager(str(path))
        assert config.get("em_settings.max_iters") == 25
        assert config.get("em_settings.tol") == 1e-8
        assert config.get("extra.flag") == 1

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))

    def test_key_value_file(self, tmp_path):
        path = tmp_path / "config.cfg"
        path.write_text(
            "# solver overrides\n"
            "ls_settings.restarts = 3\n"
            "spectral_settings.reshuffle = false\n"
            "spectral_settings.eig_selector = most_isolated_eigenvalue  # inline comment\n"
            "run_settings.output_dir = \"out/runs\"\n",
            encoding="utf-8",
        )
        config = ConfigManager(str(path))
        assert config.get("ls_settings.restarts") == 3
        assert config.get("spectral_settings.reshuffle") is False
        assert config.get("spectral_settings.eig_selector") == "most_isolated_eigenvalue"
        assert config.get("run_settings.output_dir") == "out/runs"

    def test_key_value_syntax_error(self):
        with pytest.raises(ConfigError, match="Line 2"):
            ConfigManager.parse_key_values("a.b = 1\nno equals sign here\n")


class TestAccess:
    def test_get_set_and_section(self):
        config = ConfigManager()
        assert config.get("missing.key", "fallback") == "fallback"
        config.set("new_section.value", 4)
        assert config.get("new_section.value") == 4
        section = config.section("em_settings")
        section["max_iters"] = 1
        assert config.get("em_settings.max_iters") == 500

    def test_save_config(self, tmp_path):
        config = ConfigManager()
        config.set("ls_settings.restarts", 9)
        target = tmp_path / "saved.json"
        assert config.save_config(str(target))
        assert ConfigManager(str(target)).get("ls_settings.restarts") == 9
        assert not ConfigManager().save_config()

    def test_active_config_is_installed(self, quiet_config):
        assert get_config() is quiet_config


class TestLogFilter:
    def test_disabled_logging(self, quiet_config):
        assert not quiet_config.should_show_log("error")

    def test_level_and_switches(self):
        config = ConfigManager()
        assert config.should_show_log("progress")
        assert not config.should_show_log("solver_iterations")
        config.set("logging_settings.log_level", "DEBUG")
        assert config.should_show_log("diagnostics")
        assert not config.should_show_log("solver_iterations")
        config.set("logging_settings.show_solver_iterations", True)
        assert config.should_show_log("solver_iterations")
        config.set("logging_settings.log_level", "ERROR")
        assert not config.should_show_log("warning")
        assert config.should_show_log("error")


class TestOptionsFromConfig:
    def test_sections_feed_option_models(self):
        config = ConfigManager()
        config.set("em_settings.max_iters", 40)
        config.set("ls_settings.lambda_", 0.5)
        assert build_options(EmOptions, config, "em_settings").max_iters == 40
        assert build_options(LsOptions, config, "ls_settings").lambda_ == 0.5
        assert build_options(SpectralOptions, config, "spectral_settings").reshuffle is True

    def test_overrides_win_and_none_is_ignored(self):
        config = ConfigManager()
        opts = build_options(EmOptions, config, "em_settings", max_iters=7, tol=None)
        assert opts.max_iters == 7
        assert opts.tol == 1e-8

    def test_invalid_section_value(self):
        config = ConfigManager()
        config.set("em_settings.variant", "bogus")
        with pytest.raises(ConfigError):
            build_options(EmOptions, config, "em_settings")
