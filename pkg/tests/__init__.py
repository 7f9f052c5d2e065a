"""Test suite for mgmask."""
