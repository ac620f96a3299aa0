"""Tests for MFS."""
