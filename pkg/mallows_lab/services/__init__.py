"""Service layer for Mallows Lab: rng streams, replica fan-out and report files."""
