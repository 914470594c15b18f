"""Per-element vector of remove counters.

Index k of the vector holds the sequence number of the most recent remove
initiated by replica k that the holder has (transitively) seen.  Vectors are
plain tuples of non-negative ints; all operations are pure functions, so a
vector can be shared freely between replicas and messages.

Vector length is fixed at system construction (one slot per replica);
dynamic membership is out of scope.
"""

from __future__ import annotations

HistoryVector = tuple  # tuple[int, ...], one counter per replica


def zero(n: int) -> HistoryVector:
    """All-zero vector for a system of n replicas."""
    if n < 1:
        raise ValueError("replica count must be >= 1, got %r" % (n,))
    return (0,) * n


def increment(v: HistoryVector, i: int) -> HistoryVector:
    """Copy of v with counter i bumped by one."""
    if not 0 <= i < len(v):
        raise IndexError("replica id %d out of range for %d-replica vector" % (i, len(v)))
    return v[:i] + (v[i] + 1,) + v[i + 1:]


def merge(v: HistoryVector, w: HistoryVector) -> HistoryVector:
    """Pointwise maximum. Commutative, associative, idempotent."""
    if len(v) != len(w):
        raise ValueError("vector length mismatch: %d vs %d" % (len(v), len(w)))
    return tuple(a if a >= b else b for a, b in zip(v, w))


def has_unseen(local: HistoryVector, incoming: HistoryVector) -> bool:
    """True iff incoming records a remove the local vector has not seen."""
    if len(local) != len(incoming):
        raise ValueError("vector length mismatch: %d vs %d" % (len(local), len(incoming)))
    return any(b > a for a, b in zip(local, incoming))


def equals(v: HistoryVector, w: HistoryVector) -> bool:
    """Coordinate-wise equality (lengths must match)."""
    if len(v) != len(w):
        raise ValueError("vector length mismatch: %d vs %d" % (len(v), len(w)))
    return v == w
