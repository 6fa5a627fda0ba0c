"""Case-based screening support for childhood developmental delay."""

__version__ = "0.1.0"
