#!/usr/bin/env python3
"""
Configuration Manager for the multireference alignment toolkit
"""

import copy
import json
import os
from typing import Any, Dict, Optional

from .errors import ConfigError

DEFAULT_CONFIG: Dict[str, Any] = {
    "run_settings": {
        "seed": 0,
        "threads": 1,
        "output_dir": "results",
        "paper_scale": False,
    },
    "moment_settings": {
        "d_max": 3,
        "max_tensor_entries": 2_000_000,
        "block_rows": 4096,
    },
    "spectral_settings": {
        "reshuffle": True,
        "eig_selector": "largest_eigenvalue",
        "ps_floor": 1e-8,
        "project_rho": True,
        "gap_tol": 1e-9,
        "dc_tol": 1e-10,
    },
    "em_settings": {
        "max_iters": 500,
        "tol": 1e-8,
        "init": "random_normal",
        "variant": "modified",
    },
    "ls_settings": {
        "lambda_": "auto",
        "max_iters": 2000,
        "restarts": 5,
        "tol": 1e-10,
        "ftol": 1e-24,
        "accelerate": True,
        "initial_step": 1.0,
        "shrink": 0.5,
        "grow": 2.0,
    },
    "logging_settings": {
        "enable_logs": True,
        "log_level": "INFO",
        "show_progress": True,
        "show_summary": True,
        "show_experiment_trials": True,
        "show_solver_iterations": False,
        "show_diagnostics": True,
        "show_warning": True,
        "show_error": True,
    },
}

LOG_LEVELS = {
    'DEBUG': 0,
    'INFO': 1,
    'WARNING': 2,
    'ERROR': 3,
    'CRITICAL': 4,
}

LOG_TYPE_LEVELS = {
    'progress': 1,
    'summary': 1,
    'experiment_trials': 1,
    'solver_iterations': 0,
    'diagnostics': 0,
    'warning': 2,
    'error': 3,
}


def _parse_value(raw: str) -> Any:
    """Parse a key-value file value as a JSON literal, falling back to the raw string"""
    text = raw.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip('"\'')


class ConfigManager:
    """Manages configuration settings for solvers, experiments and logging"""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from a JSON or key-value file, merged over the defaults"""
        default_config = copy.deepcopy(DEFAULT_CONFIG)
        if not self.config_file or not os.path.exists(self.config_file):
            return default_config

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"Cannot read config file {self.config_file}: {e}") from e

        if self.config_file.endswith('.json'):
            try:
                user_config = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Invalid JSON in {self.config_file}: {e}") from e
            if not isinstance(user_config, dict):
                raise ConfigError(f"Config root in {self.config_file} must be an object")
        else:
            user_config = self.parse_key_values(text)
        return self.merge_configs(default_config, user_config)

    @staticmethod
    def parse_key_values(text: str) -> Dict[str, Any]:
        """Parse 'section.key = value' lines into a nested dict"""
        nested: Dict[str, Any] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f"Line {lineno}: expected 'key = value', got {line!r}")
            key, raw = line.split('=', 1)
            keys = key.strip().split('.')
            target = nested
            for part in keys[:-1]:
                target = target.setdefault(part, {})
            target[keys[-1]] = _parse_value(raw)
        return nested

    def merge_configs(self, default: Dict, user: Dict) -> Dict:
        """Merge user config with default config"""
        result = default.copy()

        for key, value in user.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self.merge_configs(result[key], value)
            else:
                result[key] = value

        return result

    def save_config(self, path: Optional[str] = None) -> bool:
        """Save configuration to a JSON file"""
        target = path or self.config_file
        if not target:
            return False
        try:
            with open(target, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False)
            return True
        except OSError as e:
            print(f"❌ Error saving config: {e}")
            return False

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get a configuration value using dot notation (e.g., 'em_settings.max_iters')"""
        keys = key_path.split('.')
        value = self.config

        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key_path: str, value: Any) -> None:
        """Set a configuration value in memory using dot notation"""
        keys = key_path.split('.')
        config = self.config
        for key in keys[:-1]:
            if not isinstance(config.get(key), dict):
                config[key] = {}
            config = config[key]
        config[keys[-1]] = value

    def section(self, name: str) -> Dict[str, Any]:
        """Return a copy of one config section (empty if absent)"""
        return dict(self.get(name, {}) or {})

    def should_show_log(self, log_type: str) -> bool:
        """Check if a specific log type should be shown based on log level and settings"""
        if not self.get('logging_settings.enable_logs', True):
            return False

        log_level = str(self.get('logging_settings.log_level', 'INFO')).upper()
        current_level = LOG_LEVELS.get(log_level, 1)
        type_level = LOG_TYPE_LEVELS.get(log_type, 1)

        if type_level < current_level:
            return False

        return bool(self.get(f'logging_settings.show_{log_type}', True))

    def print_config_summary(self):
        """Print a summary of current configuration"""
        print("\n" + "=" * 50)
        print("⚙️  CONFIGURATION SUMMARY")
        print("=" * 50)
        print("📋 Run Settings:")
        print(f"   Seed: {self.get('run_settings.seed')}")
        print(f"   Threads: {self.get('run_settings.threads')}")
        print(f"   Output Dir: {self.get('run_settings.output_dir')}")
        print(f"   Paper Scale: {self.get('run_settings.paper_scale')}")
        print("\n🧮 Moment Settings:")
        print(f"   d_max: {self.get('moment_settings.d_max')}")
        print(f"   Tensor Budget: {self.get('moment_settings.max_tensor_entries')} entries")
        print("\n📝 Logging Settings:")
        print(f"   Log Level: {self.get('logging_settings.log_level')}")
        print(f"   Show Solver Iterations: {self.get('logging_settings.show_solver_iterations')}")
        print("=" * 50)


_active_config = ConfigManager()


def get_config() -> ConfigManager:
    """Return the process-wide active configuration"""
    return _active_config


def set_config(config: ConfigManager) -> ConfigManager:
    """Install a configuration as the process-wide active one; returns the previous one"""
    global _active_config
    previous = _active_config
    _active_config = config
    return previous
