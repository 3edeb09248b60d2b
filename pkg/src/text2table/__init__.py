"""Text-to-table generation via atomization, schema induction and table filling."""

__version__ = "0.1.0"
