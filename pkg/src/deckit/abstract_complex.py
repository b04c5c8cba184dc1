"""Abstract simplicial complexes from simplex lists of mixed dimension."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

import numpy as np

from .errors import InputError
from .simplicial_complex import (
    ParityTaggedSimplexArray,
    SimplicialComplex,
    as_simplex_array,
    canonical_format,
    face_cascade,
)


class AbstractComplex(SimplicialComplex):
    """A complex without vertex coordinates.

    Level 0 rows are vertex labels, which need not be contiguous; boundary
    rows index positions in that label list.
    """

    def __init__(self, levels, notes=None):
        super().__init__(None, levels, notes)

    @property
    def labels(self) -> np.ndarray:
        return self.levels[0].simplices[:, 0]


def build_abstract(simplex_lists: Iterable) -> AbstractComplex:
    """Build an abstract complex from arrays of simplices of any dimensions.

    The highest-dimensional simplices drive the face cascade. Simplices of
    lower dimension are merged into the computed faces at their level; those
    that are not faces of anything get empty boundary rows. Each user
    simplex keeps its input orientation through its parity.
    """
    by_dim: dict[int, list[np.ndarray]] = defaultdict(list)
    for arr in simplex_lists:
        arr = as_simplex_array(arr)
        if arr.shape[0] == 0:
            continue
        if arr.min() < 0:
            raise InputError("vertex labels must be nonnegative integers")
        by_dim[arr.shape[1] - 1].append(arr)
    if not by_dim:
        raise InputError("no simplices given")
    top_dim = max(by_dim)
    tagged = {p: canonical_format(np.concatenate(arrs)) for p, arrs in by_dim.items()}
    top = tagged.pop(top_dim)
    lower: dict[int, ParityTaggedSimplexArray] = dict(tagged)
    levels, notes = face_cascade(top, lower, dedupe_top=True)
    return AbstractComplex(levels, notes)
