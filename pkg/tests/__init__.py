"""Test suite for lmcf-lab."""
