"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class OcsrError(Exception):
    """Base class for all toolkit errors."""


class MoleculeError(OcsrError):
    """A molecular graph violates a structural invariant."""


class ValenceError(MoleculeError):
    """An atom carries more bonds plus hydrogens than its valence allows."""


class AromaticityError(MoleculeError):
    """Aromatic atoms cannot be assigned a consistent Kekule structure."""


class SizeLimitError(OcsrError):
    """Input exceeds a configured atom-count cap."""


class SmilesError(OcsrError, ValueError):
    """Base class for SMILES parsing failures.

    ``position`` is the character offset where the problem was detected,
    or ``None`` when the error concerns the string as a whole.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class SmilesSyntaxError(SmilesError):
    """Bad token or malformed construct."""


class UnclosedRingError(SmilesError):
    """A ring-closure label was opened and never closed."""


class UnclosedBranchError(SmilesError):
    """A '(' was never matched by ')'."""


class SmilesValenceError(SmilesError, ValenceError):
    """Parsed molecule violates the valence table."""


class SmilesAromaticityError(SmilesError, AromaticityError):
    """Parsed aromatic system cannot be kekulized."""


class UnsupportedFeatureError(OcsrError):
    """Molecule uses a feature the writer cannot express."""


class LayoutOverflowError(OcsrError):
    """2D layout could not resolve atom overlaps within the retry budget."""


class InsufficientPoolError(OcsrError):
    """A corpus source has fewer usable items than its budget."""


class DuplicatePredictionError(OcsrError):
    """A prediction file lists the same id more than once."""
