#!/usr/bin/env python3
"""
Multireference Alignment Toolkit

Recovers a signal and its cyclic shift distribution from noisy, randomly
shifted copies, using spectral moment inversion, expectation-maximization
and non-convex least squares, with lower-bound and spiked-model tools and
an experiment harness.
"""

__version__ = "1.0.0"
__author__ = "Multireference Alignment Toolkit Team"
__description__ = "Signal and shift-distribution recovery for multireference alignment"

# Import main classes for easy access
from .models.options import EmOptions, GeneratorConfig, LsOptions, SpectralOptions
from .services.recovery_service import RecoveryService
from .utils.config_manager import ConfigManager

# Main exports
__all__ = [
    'RecoveryService',
    'ConfigManager',
    'GeneratorConfig',
    'SpectralOptions',
    'EmOptions',
    'LsOptions',
]

# Package metadata
__package_info__ = {
    'name': 'multireference_alignment',
    'version': __version__,
    'description': __description__,
    'author': __author__,
    'main_class': 'RecoveryService',
    'config_class': 'ConfigManager',
}
