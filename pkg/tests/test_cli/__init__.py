"""Tests for equiscope.cli."""
