"""Fibred parabolic flowers: classification, reduction and verification."""
__version__ = "0.1.0"
