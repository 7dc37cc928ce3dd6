"""Tests for LinkedIn Profile Importer."""
