"""Exact certificates for Bohr-set recurrence questions.

Combinatorics of bias cells in (Z/pZ)^d, rational box geometry on the torus,
Rohlin-style tower construction, nonrecurrence witnesses, and the pipeline
that chains them into a single certified example.
"""

__version__ = "0.1.0"
