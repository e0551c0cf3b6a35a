"""Claim verification against a wiki-style corpus.

Pipeline: retrieve candidate evidence sentences (entity/title matching plus
hashed TF-IDF), score each candidate with support/refute/uninformative
probabilities, aggregate twelve per-claim features, classify with a random
forest, select evidence, and score predictions with FEVER-style metrics.
"""

__version__ = "0.1.0"
