"""Dense numerics for PT-symmetric Richardson-Gaudin spin models."""

__version__ = "0.1.0"
