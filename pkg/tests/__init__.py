"""Unit test package for fombound."""
