"""
CLI module for the purification toolkit.

Provides the ``purify`` command-line interface over the analysis pipeline.
"""
