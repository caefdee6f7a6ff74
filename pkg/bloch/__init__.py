"""Extended Bloch representation: state maps, measurement simplexes and sector decompositions."""

__version__ = "0.3.0"
