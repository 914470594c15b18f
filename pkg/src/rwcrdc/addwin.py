"""Add-win priority queue baseline.

Built on observed-remove set semantics: every add creates a uniquely tagged
element instance, and a remove cancels exactly the instances its initiator
had observed, so an add concurrent with a remove survives.  Requires causal
delivery (an add must arrive before any remove that observed it).

The upstream design this mirrors records full operation context:
* add instances are kept tag-by-tag and the cancelled-tag set only grows,
  which is what makes this baseline's metadata grow with operation count;
* each increment records the element instances (tags) its initiator had
  observed, and it counts toward the priority for as long as any of those
  instances is still live.  Once a remove kills them all, the increment's
  contribution lapses -- a re-added element starts from a fresh acquired
  value.

The converged state is a pure function of the applied message set, so
replicas agree under any delivery order.  Value semantics beyond the
observed-remove membership rule (innate value of the largest live tag,
acquired value as above) are this package's own reconstruction, chosen for
determinism and convergence rather than fidelity to any particular add-win
queue; treat its numbers as a qualitative baseline only.
"""

from __future__ import annotations

from .crpq import _checked_sum
from .messages import EffectMessage, OperationRejected


class AddWinCrpqReplica:
    """One replica of the add-win priority queue baseline."""

    def __init__(self, replica_id: int, n_replicas: int):
        self.replica_id = replica_id
        self.n_replicas = n_replicas
        self.instances = {}   # key -> {tag: innate value}, all adds ever seen
        self.live = {}        # key -> set of not-yet-cancelled tags
        self.cancelled = set()
        self.incs = {}        # key -> {op_id: (observed tags, payload)}
        self._delta = {}      # key -> cached acquired value, dropped when stale
        self._seq = 0

    def _next_op_id(self):
        self._seq += 1
        return (self.replica_id, self._seq)

    # -- updates ----------------------------------------------------------

    def prepare(self, kind, key, arg=None) -> EffectMessage:
        if kind == "add":
            if self.live.get(key):
                raise OperationRejected("add(%r): element already present" % (key,))
            op_id = self._next_op_id()
            return EffectMessage("add", key, self.replica_id, op_id,
                                 tag=op_id, value=int(arg))
        if kind == "rmv":
            observed = self.live.get(key)
            if not observed:
                raise OperationRejected("rmv(%r): element not present" % (key,))
            return EffectMessage("rmv", key, self.replica_id, self._next_op_id(),
                                 tags=frozenset(observed))
        if kind == "inc":
            observed = self.live.get(key)
            if not observed:
                raise OperationRejected("inc(%r): element not present" % (key,))
            return EffectMessage("upd", key, self.replica_id, self._next_op_id(),
                                 tags=frozenset(observed), value=int(arg))
        raise OperationRejected("unsupported operation %r" % kind)

    def apply(self, msg: EffectMessage):
        key = msg.key
        if msg.kind == "add":
            self.instances.setdefault(key, {})[msg.tag] = msg.value
            if msg.tag not in self.cancelled:
                self.live.setdefault(key, set()).add(msg.tag)
                self._delta.pop(key, None)  # dormant increments may wake up
        elif msg.kind == "rmv":
            fresh = msg.tags - self.cancelled
            if fresh:
                self.cancelled |= fresh
                alive = self.live.get(key)
                if alive:
                    alive -= fresh
                self._delta.pop(key, None)  # some increments may have lapsed
        elif msg.kind == "upd":
            self.incs.setdefault(key, {})[msg.op_id] = (msg.tags, msg.value)
            if key in self._delta:
                alive = self.live.get(key)
                if alive and msg.tags & alive:
                    self._delta[key] = _checked_sum(self._delta[key], msg.value)
        else:
            raise ValueError("add-win queue cannot apply %r" % msg.kind)

    # -- queries ----------------------------------------------------------

    def empty(self) -> bool:
        return not any(self.live.values())

    def lookup(self, key) -> bool:
        return bool(self.live.get(key))

    def _acquired(self, key) -> int:
        cached = self._delta.get(key)
        if cached is not None:
            return cached
        alive = self.live.get(key) or ()
        total = 0
        if alive:
            for observed, payload in self.incs.get(key, {}).values():
                if observed & alive:
                    total = _checked_sum(total, payload)
        self._delta[key] = total
        return total

    def _innate(self, key) -> int:
        alive = self.live[key]
        return self.instances[key][max(alive)]

    def get_pri(self, key) -> int:
        if not self.live.get(key):
            raise OperationRejected("get_pri(%r): element not present" % (key,))
        return _checked_sum(self._innate(key), self._acquired(key))

    def get_max(self):
        best_key = None
        best_pri = None
        for key, alive in self.live.items():
            if not alive:
                continue
            pri = _checked_sum(self._innate(key), self._acquired(key))
            if (best_pri is None or pri > best_pri
                    or (pri == best_pri and key < best_key)):
                best_key, best_pri = key, pri
        if best_key is None:
            raise OperationRejected("get_max on empty queue")
        return best_key, best_pri

    # -- introspection ----------------------------------------------------

    def element_count(self) -> int:
        return sum(1 for alive in self.live.values() if alive)

    def metadata_units(self) -> int:
        """Live add-instance tags plus grow-only cancelled entries."""
        return sum(len(alive) for alive in self.live.values()) + len(self.cancelled)

    def state_signature(self):
        return (
            frozenset((k, frozenset(v.items())) for k, v in self.instances.items()),
            frozenset(self.cancelled),
            frozenset((k, frozenset(v.items())) for k, v in self.incs.items() if v),
        )
