"""Cross-lingual grapheme-to-phoneme complexity toolkit."""
__version__ = "0.1.0"
