"""Fake news detection by classifying heterogeneous social media context graphs."""

__version__ = "0.0.1"
