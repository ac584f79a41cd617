"""Music-robust lyrics transcription toolkit."""

__version__ = "0.1.0"
