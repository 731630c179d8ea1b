"""Global (fluid / permuton) limit: limit curves, ODE, permuton density and experiments."""
