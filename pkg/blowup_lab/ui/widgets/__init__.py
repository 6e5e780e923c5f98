"""Widgets of the report viewer."""
