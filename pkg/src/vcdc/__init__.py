"""Belief-propagation channel decoding embedded in a variational-diffusion
reverse process, plus the Monte-Carlo harness that benchmarks it."""

__version__ = "0.1.0"
