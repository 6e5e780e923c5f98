"""Configuration, error taxonomy and logging setup."""
