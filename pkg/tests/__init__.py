"""Tests for the light transport simulator."""
