"""Cross-language transferability of a disease's article-correlation profile.

Two models for the same disease in different languages cannot share articles,
but their candidate lists are paired through the English article names they
were translated from. The transferability score r_t is the Pearson
correlation between the two models' per-article correlation vectors over the
shared English names: a high r_t means the same symptoms and topics light up
in both places, so a model built where surveillance is good is worth moving
to where it is not.

With fewer than three shared articles, or a constant correlation vector on
either side, the score is reported as not available rather than invented.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UndefinedCorrelationError
from .modeling import pearson

#: Fewest shared articles for which r_t is defined.
MIN_SHARED_ARTICLES = 3

NOT_AVAILABLE = "n/a"


@dataclass(frozen=True)
class TransferScore:
    """Transferability of one disease between two language contexts.

    r_t is None exactly when the score is not available (fewer than
    MIN_SHARED_ARTICLES shared articles, or zero variance on a side).
    """

    disease: str
    languages: tuple[str, str]
    r_t: float | None
    shared_count: int

    @property
    def available(self) -> bool:
        return self.r_t is not None


def compute_rt(
    corrs_a: dict[str, float],
    corrs_b: dict[str, float],
    disease: str = "",
    languages: tuple[str, str] = ("", ""),
) -> TransferScore:
    """Transferability score from two english-name-keyed correlation maps.

    Articles present in only one map carry no pairing information and are
    ignored. The computation is exactly symmetric in its two arguments.
    """
    shared = sorted(set(corrs_a) & set(corrs_b))
    m = len(shared)
    if m < MIN_SHARED_ARTICLES:
        return TransferScore(disease=disease, languages=languages, r_t=None, shared_count=m)
    xs = [corrs_a[name] for name in shared]
    ys = [corrs_b[name] for name in shared]
    try:
        r = pearson(xs, ys)
    except UndefinedCorrelationError:
        return TransferScore(disease=disease, languages=languages, r_t=None, shared_count=m)
    return TransferScore(disease=disease, languages=languages, r_t=r, shared_count=m)
