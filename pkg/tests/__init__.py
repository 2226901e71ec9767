"""Test suite for jacobi-histopolation."""
