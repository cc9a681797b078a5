"""NER toolkit for identity-group mentions.

Builds and applies a tagger for identity-group mentions: tokenization and
the BIO span codec, hashed features, a linear-chain CRF tagger and a
logistic identity-target classifier, agreement-based corpus alignment with
a human review loop, entity-level evaluation, and social-media mention
analytics.
"""

__version__ = "0.1.0"

from .text import CategoryLabel, Span, TokenizedText, decode_bio, encode_bio, tokenize

__all__ = [
    "CategoryLabel",
    "Span",
    "TokenizedText",
    "decode_bio",
    "encode_bio",
    "tokenize",
    "__version__",
]
