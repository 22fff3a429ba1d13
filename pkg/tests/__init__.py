"""
Test suite for the purification toolkit.
"""
