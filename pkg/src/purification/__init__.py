"""
Double-selection purification - simulator and analysis toolkit.

This package implements single- and double-selection recurrence
purification of Bell pairs and two-colorable graph states under noisy
gates, measurements and channels.
"""

__version__ = "0.1.0"
