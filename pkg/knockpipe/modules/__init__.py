"""Numerical modules of the knockoff pipeline."""
