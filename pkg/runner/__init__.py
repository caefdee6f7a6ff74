"""Config-driven command-line front end for the bloch library."""
