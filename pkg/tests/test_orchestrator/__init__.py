"""
Tests for the orchestrator.
"""
