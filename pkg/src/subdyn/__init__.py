"""Subdynamics of Z^k actions on tori and shift spaces: Lyapunov chambers and shadowing."""

__version__ = "0.1.0"
