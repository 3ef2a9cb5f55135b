"""Test suite for dcgkit; shared fixtures live in conftest.py."""
