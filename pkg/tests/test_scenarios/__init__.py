"""Tests for Equiscope scenarios."""
