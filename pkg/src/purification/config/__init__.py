"""
Configuration module for the purification toolkit.
"""

from purification.config.settings import Settings, get_settings

__all__ = ["Settings", "get_settings"]
