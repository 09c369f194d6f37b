"""Simulated cleaning-robot testbed for directed sensor fuzzing, attack detection and mitigation."""

__version__ = "0.1.0"
