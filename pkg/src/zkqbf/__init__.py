"""Zero-knowledge verification of QBF certificates over authenticated field shares."""

__version__ = "0.1.0"
