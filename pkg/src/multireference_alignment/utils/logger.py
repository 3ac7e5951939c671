#!/usr/bin/env python3
"""
Console logging gated by log type
"""

import sys
from typing import Optional

from .config_manager import ConfigManager, get_config


def log(message: str, log_type: str = "progress", config: Optional[ConfigManager] = None) -> None:
    """Print a message when its log type is enabled in the active configuration"""
    config = config or get_config()
    if not config.should_show_log(log_type):
        return
    stream = sys.stderr if log_type in ("warning", "error") else sys.stdout
    print(message, file=stream, flush=True)
