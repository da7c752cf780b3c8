"""certlab: turn security-certification artifacts into a machine-processable
dataset with vulnerability mappings, a reference graph, and a query service."""

__version__ = "0.1.0"
