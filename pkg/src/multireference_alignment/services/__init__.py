"""
Services: file containers, solver dispatch, experiments and figures
"""

from .data_service import DataService
from .experiment_service import ExperimentService
from .plot_service import PlotService
from .recovery_service import RecoveryService

__all__ = ['DataService', 'ExperimentService', 'PlotService', 'RecoveryService']
