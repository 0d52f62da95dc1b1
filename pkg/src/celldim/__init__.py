"""Spectrum dimensioning for TV delivery over a cellular network."""

__version__ = "0.1.0"
