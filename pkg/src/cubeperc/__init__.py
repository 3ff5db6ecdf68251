"""Supercritical bond percolation on the binary hypercube."""
