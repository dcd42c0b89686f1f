"""Powell–Sabin finite element exterior calculus toolkit."""

__version__ = "0.1.0"
