"""
Utility functions for msoext.
"""
from .config_manager import ConfigManager, Limits
from .exceptions import MSOError

__all__ = [
    'ConfigManager',
    'Limits',
    'MSOError'
]
