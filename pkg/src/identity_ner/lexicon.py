"""Bundled per-category lexicon.

These are the high-frequency mention words observed for each identity
group; they seed the synthetic-corpus generator so the whole pipeline is
runnable without any external dataset.
"""

from __future__ import annotations

from .text import CategoryLabel

LEXICON: dict[CategoryLabel, tuple[str, ...]] = {
    CategoryLabel.GENDER: (
        "women", "male", "men", "transgender", "feminism",
        "transgendered", "gender", "man", "woman", "trans",
    ),
    CategoryLabel.ETHNICITY: (
        "white", "black", "immigrants", "non-white", "racist",
        "racism", "asian", "racial", "african", "latino",
    ),
    CategoryLabel.SEXUAL_ORIENTATION: (
        "gay", "lesbian", "bisexual", "LGBT", "homosexual",
        "homosexuality", "same-sex", "anti-gay", "heterosexuals", "homophobia",
    ),
    CategoryLabel.RELIGION: (
        "islam", "catholic", "muslim", "jews", "jewish",
        "terrorism", "islamophobia", "palestinians", "extremists", "atheists",
    ),
}

for _category, _words in LEXICON.items():
    assert len(_words) >= 10, f"lexicon for {_category} is too small"
