#!/usr/bin/env python3
"""
Blow-up laboratory
Command-line entry point for the blow-up experiments.
"""

from blowup_lab.cli import main

if __name__ == "__main__":
    main()
