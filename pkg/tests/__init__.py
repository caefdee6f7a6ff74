"""Test package marker to enable relative imports like `.utils`."""

