"""Report viewer."""
