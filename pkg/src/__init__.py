"""Weighted Jacobi histopolation on [-1, 1]."""
