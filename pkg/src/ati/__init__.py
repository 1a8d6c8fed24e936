"""Trajectory-to-latent motion conditioning toolkit."""

__version__ = "0.1.0"
