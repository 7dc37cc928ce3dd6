"""Carbon- and water-aware scheduling of batch jobs across data-center regions."""

__version__ = "0.1.0"
