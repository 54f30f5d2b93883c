"""Test tagging and timeout helpers used by run_tests.py."""
