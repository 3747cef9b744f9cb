"""Tests for equiscope.core module."""
