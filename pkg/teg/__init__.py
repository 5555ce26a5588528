"""Task-equivariant few-shot node classification."""

__version__ = "0.1.0"
