"""Remove-win replicated set, in two designs.

BasicRwset keeps the full remove history as a set of unique tags per element
and relies on causal message delivery; a delivery that violates that
assumption is a fatal harness error.

OptRwset encodes the remove history of each element as a per-replica counter
vector and needs no delivery-order guarantee at all: every effect first
executes any remove it has not yet seen (carried inside the vector) and then
gates the add on phase equality.

Both expose the prepare/effect split: ``prepare_*`` runs only at the
initiating replica and returns the EffectMessage to broadcast; ``apply``
consumes that message at every replica, the initiator included.
"""

from __future__ import annotations

from . import history_vector as hv
from .messages import (
    KIND_ADD,
    KIND_RMV,
    CausalDeliveryViolation,
    EffectMessage,
    OperationRejected,
)


class BasicRwset:
    """Tag-set design; requires causal delivery from the transport."""

    def __init__(self, replica_id: int, n_replicas: int):
        self.replica_id = replica_id
        self.n_replicas = n_replicas
        self.elements = set()          # E
        self.tags = {}                 # key -> set of remove tags (T)
        self._seq = 0

    def _next_op_id(self):
        self._seq += 1
        return (self.replica_id, self._seq)

    def prepare(self, kind, key, arg=None) -> EffectMessage:
        if kind == KIND_ADD:
            return self.prepare_add(key)
        if kind == KIND_RMV:
            return self.prepare_rmv(key)
        raise OperationRejected("unsupported operation %r" % kind)

    def prepare_add(self, key) -> EffectMessage:
        if key in self.elements:
            raise OperationRejected("add(%r): element already present" % (key,))
        hr = frozenset(self.tags.get(key, ()))
        return EffectMessage(KIND_ADD, key, self.replica_id, self._next_op_id(), tags=hr)

    def prepare_rmv(self, key) -> EffectMessage:
        if key not in self.elements:
            raise OperationRejected("rmv(%r): element not present" % (key,))
        op_id = self._next_op_id()
        return EffectMessage(KIND_RMV, key, self.replica_id, op_id, tag=op_id)

    def apply(self, msg: EffectMessage):
        if msg.kind == KIND_ADD:
            local = self.tags.get(msg.key, set())
            if not msg.tags <= local:
                raise CausalDeliveryViolation(
                    "add(%r) delivered before removes it observed: %r not in %r"
                    % (msg.key, set(msg.tags) - local, local))
            if msg.tags == local:
                self.elements.add(msg.key)
        elif msg.kind == KIND_RMV:
            self.tags.setdefault(msg.key, set()).add(msg.tag)
            self.elements.discard(msg.key)
        else:
            raise ValueError("basic set cannot apply %r" % msg.kind)

    def lookup(self, key) -> bool:
        return key in self.elements

    def state_signature(self):
        return (frozenset(self.elements),
                frozenset((k, frozenset(v)) for k, v in self.tags.items() if v))


class OptRwset:
    """Vector-encoded design; tolerates arbitrary delivery order."""

    def __init__(self, replica_id: int, n_replicas: int):
        self.replica_id = replica_id
        self.n_replicas = n_replicas
        self.elements = set()          # E
        self.vectors = {}              # key -> history vector (T)
        self._seq = 0

    def _next_op_id(self):
        self._seq += 1
        return (self.replica_id, self._seq)

    def _vec(self, key):
        return self.vectors.get(key) or hv.zero(self.n_replicas)

    def prepare(self, kind, key, arg=None) -> EffectMessage:
        if kind == KIND_ADD:
            return self.prepare_add(key)
        if kind == KIND_RMV:
            return self.prepare_rmv(key)
        raise OperationRejected("unsupported operation %r" % kind)

    def prepare_add(self, key) -> EffectMessage:
        if key in self.elements:
            raise OperationRejected("add(%r): element already present" % (key,))
        return EffectMessage(KIND_ADD, key, self.replica_id, self._next_op_id(),
                             vector=self._vec(key))

    def prepare_rmv(self, key) -> EffectMessage:
        if key not in self.elements:
            raise OperationRejected("rmv(%r): element not present" % (key,))
        cr = hv.increment(self._vec(key), self.replica_id)
        return EffectMessage(KIND_RMV, key, self.replica_id, self._next_op_id(),
                             vector=cr)

    def _rmv_effect(self, key, cr):
        t = self._vec(key)
        if hv.has_unseen(t, cr):
            self.elements.discard(key)
            self.vectors[key] = hv.merge(t, cr)

    def apply(self, msg: EffectMessage):
        if msg.kind == KIND_ADD:
            # Execute removes this add observed but we have not, then gate
            # the add on being in the same phase as this replica.
            self._rmv_effect(msg.key, msg.vector)
            if msg.vector == self._vec(msg.key):
                self.elements.add(msg.key)
        elif msg.kind == KIND_RMV:
            self._rmv_effect(msg.key, msg.vector)
        else:
            raise ValueError("remove-win set cannot apply %r" % msg.kind)

    def lookup(self, key) -> bool:
        return key in self.elements

    def state_signature(self):
        return (frozenset(self.elements), frozenset(self.vectors.items()))
