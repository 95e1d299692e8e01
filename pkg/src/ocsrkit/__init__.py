"""Data, evaluation and reward tooling for molecule-image-to-SMILES recognition."""

__version__ = "0.1.0"
