"""
Tests for tool modules.
"""
