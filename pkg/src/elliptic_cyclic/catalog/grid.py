"""Parameter-assignment enumeration for catalog entries.

Given an entry and a point count ``p``, enumerate concrete assignments of the
entry's free parameters (r, s, t, l) that satisfy its constraints, in a fixed
lexicographic order so every caller sees the same sequence.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .model import IdentitySpec, constraints_hold

__all__ = ["iter_param_assignments", "default_p_values"]

#: Default p ranges per family, used when the caller does not override them.
_FAMILY_P: dict[str, tuple[int, ...]] = {
    "MI-I": (2, 3, 4, 5, 6, 7, 8),
    "MI-II": (2, 3, 4, 5, 6, 7, 8),
    "MI-III": (3, 5, 7),
    "MI-IV": (3, 5, 7),
    "MI-I-alt": (4, 6, 8),
    "MI-II-alt": (4, 6, 8),
    "direct": (2, 3, 4, 5, 6, 7, 8),
}


def default_p_values(family: str) -> tuple[int, ...]:
    """The default point counts explored for a family."""
    return _FAMILY_P[family]


def _domain(name: str, p: int) -> range:
    if name == "l":
        return range(1, min(p, 8) + 1)
    return range(1, p)


def iter_param_assignments(spec: IdentitySpec, p: int) -> Iterator[dict[str, int]]:
    """Yield ``{'p': p, 'r': ..., ...}`` dicts satisfying the constraints.

    Shift parameters range over ``1..p-1``; a chain-length parameter ``l``
    over ``1..min(p, 8)``.  Assignments come in lexicographic order of the
    declared parameter tuple, so the enumeration is deterministic.
    """
    names = list(spec.params)
    if not names:
        params = {"p": p}
        if constraints_hold(spec.constraints, params):
            yield params
        return
    for combo in itertools.product(*(_domain(n, p) for n in names)):
        params = {"p": p, **dict(zip(names, combo))}
        if constraints_hold(spec.constraints, params):
            yield params
