"""Batch toolkit for ad/cn speech screening.

Pipelines: acoustic feature tables with recursive feature elimination,
lexical diversity features from transcripts, and TF-IDF + sentence-embedding
fusion, each classified with from-scratch logistic regression, random forest,
or polynomial-kernel SVM and evaluated with stratified cross-validation.
"""

__version__ = "0.1.0"
