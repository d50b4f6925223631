"""Two-body infall with rest-mass paying for kinetic energy."""

__version__ = "0.1.0"
