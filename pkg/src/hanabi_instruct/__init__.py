"""Two-player Hanabi with linear factor-weight agents and instruction generation."""

__version__ = "0.1.0"
