"""Handlers for output files, experiment pipelines and the oracle suite."""
