"""Tests for Equiscope."""
