"""LCDR lab test suite."""
