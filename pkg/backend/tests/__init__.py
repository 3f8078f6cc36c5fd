# tests/__init__.py - Test package initialization
"""
Unit, property and end-to-end tests for the UPG Kolchin toolkit.

Property suites use a seeded random.Random so every run checks the same samples.
"""
