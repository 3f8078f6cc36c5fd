#!/usr/bin/env python3
"""
UPG Kolchin toolkit - Main Entry Point
Entry point for running the CLI as a module
"""

from .main import cli

if __name__ == '__main__':
    cli()
