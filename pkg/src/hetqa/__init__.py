"""Multi-hop question answering over heterogeneous text and KB sources."""

__version__ = "0.1.0"
