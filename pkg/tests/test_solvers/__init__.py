"""Tests for equiscope.solvers."""
