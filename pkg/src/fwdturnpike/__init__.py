"""Forward performance criteria generated by positive space-time harmonic functions."""

__version__ = "0.1.0"
