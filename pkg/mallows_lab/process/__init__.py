"""Birth-process simulation: jump rates, thinning and the birth Mallows process."""
