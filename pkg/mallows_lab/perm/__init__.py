"""Finite permutations: inversion encodings, exact Mallows law and small-n oracles."""
