"""Deterministic indoor terahertz propagation simulator with distributed
reconfigurable intelligent surfaces (RIS) and a best-panel selection sweep."""

__version__ = "0.1.0"
