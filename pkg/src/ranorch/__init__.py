"""Intent-driven RAN-slicing simulator and agentic orchestration engine."""

__version__ = "0.1.0"
