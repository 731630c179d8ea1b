"""Local limit on Z: inversion recursions, windowed process, coupling and experiments."""
