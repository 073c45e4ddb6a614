"""Tests for the sciencemap package."""
