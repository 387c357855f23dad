"""Metric-aware edge/cloud routing for spoken IoT commands."""

__version__ = "0.1.0"
