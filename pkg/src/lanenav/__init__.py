"""lanenav: simulated strip-lane haptic navigation system."""

__version__ = "0.1.0"
