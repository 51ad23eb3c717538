"""Test suite for cgn-solve."""
