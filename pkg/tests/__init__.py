"""Test suite for qfi-optics."""
