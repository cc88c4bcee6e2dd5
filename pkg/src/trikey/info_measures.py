"""Shannon information measures over variable subsets of a JointPmf3.

Everything is in bits (base-2 logarithms) with the 0*log(0) = 0 convention
enforced by skipping zero-mass cells; epsilon-flooring would bias
small-entropy results.  Variable subsets are written as strings of labels
("X", "YZ", "XYZ") or any iterable of single labels.

Tiny negative values caused by rounding (conditional entropies, mutual
informations) are clamped to 0; a negative value beyond 1e-10 means the
inputs were inconsistent and raises instead of being hidden.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    EmptyVarSetError,
    InternalConsistencyError,
    OverlappingSetsError,
    ParamOutOfRangeError,
)
from .source_model import JointPmf3

_AXIS = {"X": 0, "Y": 1, "Z": 2}
_NEG_CLAMP = 1e-10


def _axes(varset, *, allow_empty: bool = False) -> tuple[int, ...]:
    """Normalize a variable subset into a sorted tuple of table axes."""
    labels = [str(v).upper() for v in varset]
    axes = []
    for lab in labels:
        if lab not in _AXIS:
            raise ValueError(f"unknown variable label {lab!r}; expected X, Y, Z")
        axes.append(_AXIS[lab])
    if len(set(axes)) != len(axes):
        raise OverlappingSetsError(f"duplicate label in variable set {labels!r}")
    if not axes and not allow_empty:
        raise EmptyVarSetError("variable set must be nonempty")
    return tuple(sorted(axes))


def _require_disjoint(*axis_tuples):
    seen = set()
    for axes in axis_tuples:
        if seen & set(axes):
            raise OverlappingSetsError("variable sets must be pairwise disjoint")
        seen |= set(axes)


def _clamp(value: float, what: str) -> float:
    if value < 0.0:
        if value < -_NEG_CLAMP:
            raise InternalConsistencyError(f"{what} = {value!r} is negative beyond rounding")
        return 0.0
    return value


def _entropy_axes(pmf: JointPmf3, axes: tuple[int, ...]) -> float:
    drop = tuple(a for a in range(3) if a not in axes)
    marg = pmf.table.sum(axis=drop) if drop else pmf.table
    p = marg.ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(pmf: JointPmf3, varset) -> float:
    """Shannon entropy (bits) of the marginal on the given variables."""
    return _entropy_axes(pmf, _axes(varset))


def conditional_entropy(pmf: JointPmf3, target, given) -> float:
    """H(target | given) = H(target, given) - H(given), clamped at 0."""
    t = _axes(target)
    g = _axes(given, allow_empty=True)
    _require_disjoint(t, g)
    if not g:
        return _entropy_axes(pmf, t)
    joint = tuple(sorted(t + g))
    return _clamp(_entropy_axes(pmf, joint) - _entropy_axes(pmf, g), "conditional entropy")


def mutual_information(pmf: JointPmf3, u, v) -> float:
    """I(u ; v) = H(u) + H(v) - H(u, v), clamped at 0."""
    ua = _axes(u)
    va = _axes(v)
    _require_disjoint(ua, va)
    value = (
        _entropy_axes(pmf, ua)
        + _entropy_axes(pmf, va)
        - _entropy_axes(pmf, tuple(sorted(ua + va)))
    )
    return _clamp(value, "mutual information")


def conditional_mutual_information(pmf: JointPmf3, u, v, w=()) -> float:
    """I(u ; v | w), with empty w reducing to plain mutual information."""
    ua = _axes(u)
    va = _axes(v)
    wa = _axes(w, allow_empty=True)
    _require_disjoint(ua, va, wa)
    if not wa:
        return mutual_information(pmf, u, v)
    value = (
        _entropy_axes(pmf, tuple(sorted(ua + wa)))
        + _entropy_axes(pmf, tuple(sorted(va + wa)))
        - _entropy_axes(pmf, tuple(sorted(ua + va + wa)))
        - _entropy_axes(pmf, wa)
    )
    return _clamp(value, "conditional mutual information")


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p), with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRangeError(f"p={p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))
