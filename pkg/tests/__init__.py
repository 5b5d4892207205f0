"""Python package for tests."""
