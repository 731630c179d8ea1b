"""Test package for the Mallows process lab."""
