"""hdx: coset complexes, F2 (co)homology, cone functions and expansion certificates."""

__version__ = "0.1.0"
