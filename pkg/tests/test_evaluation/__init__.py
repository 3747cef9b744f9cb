"""Tests for equiscope.evaluation."""
