"""Four-valued qualitative signs and their product/sum tables."""

from __future__ import annotations

from enum import Enum

import numpy as np


class Sign(Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    ZERO = "0"
    AMBIGUOUS = "?"

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def is_decisive(self) -> bool:
        return self is not Sign.AMBIGUOUS

    def flip(self) -> "Sign":
        if self is Sign.POSITIVE:
            return Sign.NEGATIVE
        if self is Sign.NEGATIVE:
            return Sign.POSITIVE
        return self

    @classmethod
    def parse(cls, text: str) -> "Sign":
        aliases = {"+": cls.POSITIVE, "-": cls.NEGATIVE, "−": cls.NEGATIVE,
                   "0": cls.ZERO, "?": cls.AMBIGUOUS}
        try:
            return aliases[text.strip()]
        except KeyError:
            return cls[text.strip().upper()]

    def __str__(self) -> str:
        return self.value


def sign_multiply(a: Sign, b: Sign) -> Sign:
    """Sign of a chained influence (the QPN otimes table)."""
    if a is Sign.ZERO or b is Sign.ZERO:
        return Sign.ZERO
    if a is Sign.AMBIGUOUS or b is Sign.AMBIGUOUS:
        return Sign.AMBIGUOUS
    return Sign.POSITIVE if a is b else Sign.NEGATIVE


def sign_add(a: Sign, b: Sign) -> Sign:
    """Sign of two parallel influences combined (the QPN oplus table)."""
    if a is Sign.ZERO:
        return b
    if b is Sign.ZERO:
        return a
    if a is b:
        return a
    return Sign.AMBIGUOUS


def dominance_sign(cdfs: np.ndarray, tol: float = 1e-9) -> Sign:
    """Classify how a family of CDFs moves along an ordered index.

    ``cdfs`` has the ordered index on axis -2 and the CDF coordinates on
    axis -1; any leading axes are contexts that must all agree.  POSITIVE
    means higher index -> pointwise lower CDF (first-order stochastic
    dominance), NEGATIVE the reverse, ZERO both (equal within ``tol``).
    """
    m = cdfs.shape[-2]
    if m < 2:
        return Sign.ZERO
    i, j = np.triu_indices(m, k=1)
    # later minus earlier, for every ordered pair i < j
    diff = cdfs[..., j, :] - cdfs[..., i, :]
    pos = bool(np.all(diff <= tol))
    neg = bool(np.all(diff >= -tol))
    if pos and neg:
        return Sign.ZERO
    if pos:
        return Sign.POSITIVE
    if neg:
        return Sign.NEGATIVE
    return Sign.AMBIGUOUS
