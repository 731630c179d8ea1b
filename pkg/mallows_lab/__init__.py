"""Mallows Lab package."""
