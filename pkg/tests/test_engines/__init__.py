"""
Tests for engine modules.
"""
