"""Exact invariants of finitely presented modules over Iwasawa algebras."""

__version__ = "0.1.0"
