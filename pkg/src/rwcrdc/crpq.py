"""Replicated priority queue with remove-win conflict resolution.

Instantiates the skeleton with integer priorities: the innate part is set by
the winning add (larger replica id wins, strictly, so a redelivered add from
the same initiator is a no-op), the acquired part is the running sum of
increment payloads in the current phase, and the exposed priority is their
sum.  Priorities are signed 64-bit; arithmetic that would overflow aborts
instead of wrapping.
"""

from __future__ import annotations

from .messages import EffectMessage, OperationRejected
from .skeleton import Resolver, SkeletonReplica

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


def _checked_sum(a: int, b: int) -> int:
    s = a + b
    if not INT64_MIN <= s <= INT64_MAX:
        raise OverflowError("priority arithmetic overflows int64: %d + %d" % (a, b))
    return s


def _larger_replica_wins(current, incoming):
    # Maximum under the total order on (replica id, innate value).  The
    # second component only matters when one replica issues two same-phase
    # adds of one element (possible while its own first effect is still in
    # flight); a plain strict id comparison would make the winner depend on
    # delivery order.  Redelivering the winner is still a no-op.
    if current is None or incoming > current:
        return incoming
    return current


PRIORITY_RESOLVER = Resolver(
    resolve_add=_larger_replica_wins,
    apply_upd=lambda acq, i, _initiator: _checked_sum(acq, i),
    fresh_inn=lambda: 0,
    fresh_acq=lambda: 0,
    interpret=_checked_sum,
)


class CrpqReplica:
    """One replica of the remove-win priority queue."""

    def __init__(self, replica_id: int, n_replicas: int):
        self._skel = SkeletonReplica(replica_id, n_replicas, PRIORITY_RESOLVER)
        self.replica_id = replica_id
        self.n_replicas = n_replicas

    # -- updates ----------------------------------------------------------

    def prepare(self, kind, key, arg=None) -> EffectMessage:
        if kind == "add":
            return self._skel.prepare_add(key, int(arg))
        if kind == "inc":
            return self._skel.prepare_upd(key, int(arg))
        if kind == "rmv":
            return self._skel.prepare_rmv(key)
        raise OperationRejected("unsupported operation %r" % kind)

    def apply(self, msg: EffectMessage):
        self._skel.apply(msg)

    # -- queries ----------------------------------------------------------

    def empty(self) -> bool:
        return not self._skel.owners

    def lookup(self, key) -> bool:
        return key in self._skel.owners

    def get_pri(self, key) -> int:
        if key not in self._skel.owners:
            raise OperationRejected("get_pri(%r): element not present" % (key,))
        inn, acq = self._skel.values[key]
        return _checked_sum(inn, acq)

    def get_max(self):
        """(id, priority) of a maximal element; ties go to the smallest id."""
        if not self._skel.owners:
            raise OperationRejected("get_max on empty queue")
        best_key = None
        best_pri = None
        values = self._skel.values
        for key in self._skel.owners:
            inn, acq = values[key]
            pri = _checked_sum(inn, acq)
            if (best_pri is None or pri > best_pri
                    or (pri == best_pri and key < best_key)):
                best_key, best_pri = key, pri
        return best_key, best_pri

    # -- introspection ----------------------------------------------------

    def element_count(self) -> int:
        return len(self._skel.owners)

    def metadata_units(self) -> int:
        """Stored remove-history coordinates across all tracked elements."""
        return sum(len(v) for v in self._skel.vectors.values())

    def tracked_entries(self) -> int:
        """Number of elements with a stored remove-history vector."""
        return len(self._skel.vectors)

    def state_signature(self):
        return self._skel.state_signature()
