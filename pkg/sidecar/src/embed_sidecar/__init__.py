"""Frozen transformer embeddings for transcript directories.

Reads the same ``<dir>/<id>.txt`` transcript layout as the training
toolkit and writes the 768-column ``id,e0..e767`` CSV it ingests.
"""

__version__ = "0.1.0"
