"""Vascular age estimation from cerebral blood flow velocity pulses."""

__version__ = "0.1.0"
