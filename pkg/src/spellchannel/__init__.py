"""Corpus-trained noisy-channel spelling correction toolkit."""

__version__ = "0.1.0"
