"""Remove-win collection skeleton with pluggable value resolution.

The skeleton is the optimized remove-win set augmented with values.  Element
existence is settled by the remove-win rule; what remains is resolving value
conflicts between non-remove operations, which the user supplies as a small
hook bundle (Resolver):

* ``resolve_add``  -- picks the winner among concurrent adds of one element.
* ``apply_upd``    -- folds an update payload into the acquired value;
                      concurrent applications must commute.
* ``fresh_inn`` / ``fresh_acq`` -- neutral innate/acquired values.
* ``interpret``    -- combines innate and acquired value on the read side.

An element's value is split in two: the innate part, owned by the winning
add, and the acquired part, accumulated by updates within the current phase.
Updates gate only on phase equality, not on membership, so an update may
create a value entry before its same-phase add arrives; the add later fills
in the innate part.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from . import history_vector as hv
from .messages import (
    KIND_ADD,
    KIND_RMV,
    KIND_UPD,
    EffectMessage,
    HookContractError,
    OperationRejected,
)


@dataclass(frozen=True)
class Resolver:
    """User-supplied conflict-resolution hooks.

    ``resolve_add(current, incoming)`` receives ``(initiator, innate)`` pairs
    (``current`` is None when no add has won yet) and must be a deterministic,
    order-insensitive choice -- picking the maximum under a total order is
    sufficient.  ``apply_upd(acquired, payload, initiator)`` must commute for
    a fixed element.  Hooks must be pure: no hidden shared state.
    """

    resolve_add: Callable[[Optional[Tuple[int, object]], Tuple[int, object]], Tuple[int, object]]
    apply_upd: Callable[[object, object, int], object]
    fresh_inn: Callable[[], object]
    fresh_acq: Callable[[], object]
    interpret: Callable[[object, object], object]


def assert_upd_commutes(resolver: Resolver, payloads, initiators, rounds: int = 200,
                        seed: int = 0, start=None) -> None:
    """Randomized pair check that apply_upd applications commute.

    Draws payload/initiator pairs and asserts both application orders agree;
    raises HookContractError naming the hook on the first counterexample.
    """
    rng = random.Random(seed)
    payloads = list(payloads)
    initiators = list(initiators)
    for _ in range(rounds):
        base = resolver.fresh_acq() if start is None else start
        a, b = rng.choice(payloads), rng.choice(payloads)
        ia, ib = rng.choice(initiators), rng.choice(initiators)
        ab = resolver.apply_upd(resolver.apply_upd(base, a, ia), b, ib)
        ba = resolver.apply_upd(resolver.apply_upd(base, b, ib), a, ia)
        if ab != ba:
            raise HookContractError(
                "apply_upd is not commutative: base=%r, (%r by %d) then (%r by %d) "
                "gives %r but the reverse order gives %r" % (base, a, ia, b, ib, ab, ba))


class SkeletonReplica:
    """One replica of a remove-win collection with values."""

    def __init__(self, replica_id: int, n_replicas: int, resolver: Resolver):
        self.replica_id = replica_id
        self.n_replicas = n_replicas
        self.resolver = resolver
        self.owners = {}     # E: key -> initiator id of the winning add
        self.vectors = {}    # T: key -> remove-history vector
        self.values = {}     # V: key -> (innate, acquired)
        self._seq = 0

    # -- prepare ----------------------------------------------------------

    def _next_op_id(self):
        self._seq += 1
        return (self.replica_id, self._seq)

    def _vec(self, key):
        return self.vectors.get(key) or hv.zero(self.n_replicas)

    def prepare_add(self, key, innate) -> EffectMessage:
        if key in self.owners:
            raise OperationRejected("add(%r): element already present" % (key,))
        return EffectMessage(KIND_ADD, key, self.replica_id, self._next_op_id(),
                             vector=self._vec(key), value=innate)

    def prepare_upd(self, key, payload) -> EffectMessage:
        if key not in self.owners:
            raise OperationRejected("upd(%r): element not present" % (key,))
        return EffectMessage(KIND_UPD, key, self.replica_id, self._next_op_id(),
                             vector=self._vec(key), value=payload)

    def prepare_rmv(self, key) -> EffectMessage:
        if key not in self.owners:
            raise OperationRejected("rmv(%r): element not present" % (key,))
        cr = hv.increment(self._vec(key), self.replica_id)
        return EffectMessage(KIND_RMV, key, self.replica_id, self._next_op_id(),
                             vector=cr)

    # -- effect -----------------------------------------------------------

    def _rmv_effect(self, key, cr):
        t = self._vec(key)
        if hv.has_unseen(t, cr):
            self.owners.pop(key, None)
            self.values.pop(key, None)
            self.vectors[key] = hv.merge(t, cr)

    def apply(self, msg: EffectMessage):
        key, cr = msg.key, msg.vector
        if msg.kind == KIND_RMV:
            self._rmv_effect(key, cr)
            return
        self._rmv_effect(key, cr)
        if cr != self._vec(key):
            return  # older phase; wiped by a remove we have already seen
        if msg.kind == KIND_ADD:
            current = None
            if key in self.owners:
                current = (self.owners[key], self.values[key][0])
            winner = self.resolver.resolve_add(current, (msg.initiator, msg.value))
            acq = self.values[key][1] if key in self.values else self.resolver.fresh_acq()
            self.owners[key] = winner[0]
            self.values[key] = (winner[1], acq)
        elif msg.kind == KIND_UPD:
            inn, acq = self.values.get(key) or (self.resolver.fresh_inn(),
                                                self.resolver.fresh_acq())
            self.values[key] = (inn, self.resolver.apply_upd(acq, msg.value, msg.initiator))
        else:
            raise ValueError("skeleton cannot apply %r" % msg.kind)

    # -- queries ----------------------------------------------------------

    def contains(self, key) -> bool:
        return key in self.owners

    def value(self, key):
        """interpret(innate, acquired) if the element is present, else None."""
        if key not in self.owners:
            return None
        inn, acq = self.values[key]
        return self.resolver.interpret(inn, acq)

    def state_signature(self):
        return (frozenset(self.owners.items()),
                frozenset(self.vectors.items()),
                frozenset(self.values.items()))
