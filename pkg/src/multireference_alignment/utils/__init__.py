"""
Utility modules: configuration, logging, errors and helpers
"""

from .config_manager import ConfigManager, get_config, set_config
from .logger import log

__all__ = ['ConfigManager', 'get_config', 'set_config', 'log']
