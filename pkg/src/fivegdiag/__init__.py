"""Fault injection, telemetry collection and LLM-oriented fault diagnosis for a simulated 5G core."""

__version__ = "0.1.0"
