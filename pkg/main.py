#!/usr/bin/env python3
"""
Main entry point for the CEV pricing command line
"""
import sys

from src.cev.cli import run

if __name__ == "__main__":
    sys.exit(run())
