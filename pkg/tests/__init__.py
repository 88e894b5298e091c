"""
Tests for the quantum coin tossing toolkit.
"""
