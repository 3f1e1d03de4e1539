"""HTTP shim serving sentence embeddings and cross-encoder relevance scores."""

__version__ = "0.1.0"
