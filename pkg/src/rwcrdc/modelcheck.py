"""Brute-force semantics checking on small instances.

Two independent pieces:

* A phase oracle that predicts converged membership straight from the
  operation graph.  Visibility edges (which operations an initiator had
  applied when it issued a new one) are transitively closed to get each
  operation's causal remove history; an element survives iff some add saw
  every remove there is.  The oracle never looks at the vectors the
  implementation computes.

* An exhaustive enumerator of small executions: every assignment of up to
  max_ops add/rmv operations on one element to up to three replicas, with
  every distinct set of effects the initiator may have applied before each
  issue (applied sets grow monotonically per replica, everything else is
  free).  Each history is checked three ways: the optimized set converges
  to one state under every permutation of the full message set, its
  membership matches the phase oracle, and on causally consistent schedules
  the basic tag-set design agrees with it after every single delivery.

Branches whose applied sets differ but produce the same initiator state and
the same causal remove history are interchangeable, so the enumerator keeps
one representative (``dedup=True``); the equivalence itself is validated by
comparing against the un-deduplicated enumeration at small sizes.

Also hosts the randomized convergence harness used by the property suite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import FrozenSet, List

from .messages import EffectMessage
from .rwset import BasicRwset, OptRwset

KEY = "e"


def _clone_opt(r: OptRwset) -> OptRwset:
    c = OptRwset(r.replica_id, r.n_replicas)
    c.elements = set(r.elements)
    c.vectors = dict(r.vectors)
    return c


@dataclass(frozen=True)
class OpNode:
    idx: int
    replica: int
    kind: str                      # 'add' | 'rmv'
    visible: FrozenSet[int]        # ops applied at the initiator at issue
    message: EffectMessage


def causal_remove_history(ops: List[OpNode], idx: int) -> FrozenSet[int]:
    """Removes transitively visible to op idx, from the graph alone."""
    seen = set()
    stack = list(ops[idx].visible)
    while stack:
        j = stack.pop()
        if j in seen:
            continue
        seen.add(j)
        stack.extend(ops[j].visible)
    return frozenset(j for j in seen if ops[j].kind == "rmv")


def phase_oracle_membership(ops: List[OpNode]) -> bool:
    """Predicted converged membership of the single element."""
    all_rmvs = frozenset(o.idx for o in ops if o.kind == "rmv")
    return any(o.kind == "add" and causal_remove_history(ops, o.idx) == all_rmvs
               for o in ops)


# -- exhaustive enumeration --------------------------------------------------

def _opt_state(n_replicas: int, replica_id: int, ops: List[OpNode],
               applied: FrozenSet[int]) -> OptRwset:
    r = OptRwset(replica_id, n_replicas)
    for idx in sorted(applied):
        r.apply(ops[idx].message)
    return r


def _closure(ops: List[OpNode], applied: FrozenSet[int],
             cache: dict) -> FrozenSet[int]:
    out = set()
    for idx in applied:
        got = cache.get(idx)
        if got is None:
            got = causal_remove_history(ops, idx)
            if ops[idx].kind == "rmv":
                got = got | {idx}
            else:
                got = frozenset(got)
            cache[idx] = got
        out |= got
    return frozenset(out)


class ExhaustiveChecker:
    """Enumerates and checks all small executions of the remove-win set."""

    def __init__(self, n_replicas: int = 3, max_ops: int = 6,
                 dedup: bool = True, causal_only: bool = False):
        self.n = n_replicas
        self.max_ops = max_ops
        self.dedup = dedup
        self.causal_only = causal_only
        self.histories = 0
        self.failures: List[str] = []
        self._multiset_cache = {}
        self._ext_limit_hit = False

    # A history is grown one op at a time: pick a replica, pick which of the
    # already-issued effects it has applied (a superset of what it had last
    # time; always including its own), read off the only valid op type, and
    # prepare the real message from the real replica state.

    def run(self) -> "ExhaustiveChecker":
        self._extend([], [frozenset() for _ in range(self.n)])
        return self

    def _extend(self, ops: List[OpNode], applied_sets):
        if ops:
            self._check_history(ops)
        if len(ops) >= self.max_ops:
            return
        clo_cache = {}
        for r in range(self.n):
            base = applied_sets[r]
            unapplied = [o.idx for o in ops if o.idx not in base]
            seen_keys = set()
            for mask in range(1 << len(unapplied)):
                extra = [unapplied[i] for i in range(len(unapplied))
                         if mask >> i & 1]
                new_applied = base | frozenset(extra)
                if self.causal_only and not self._causally_closed(ops, new_applied, clo_cache):
                    continue
                state = _opt_state(self.n, r, ops, new_applied)
                if self.dedup:
                    key = (r, state.state_signature(),
                           _closure(ops, new_applied, clo_cache))
                    if key in seen_keys:
                        continue
                    seen_keys.add(key)
                kind = "rmv" if state.lookup(KEY) else "add"
                msg = (state.prepare_rmv(KEY) if kind == "rmv"
                       else state.prepare_add(KEY))
                idx = len(ops)
                node = OpNode(idx, r, kind, new_applied, msg)
                next_applied = list(applied_sets)
                next_applied[r] = new_applied | {idx}
                self._extend(ops + [node], next_applied)

    def _causal_past(self, ops, idx, cache):
        got = cache.get(("past", idx))
        if got is None:
            seen = set()
            stack = list(ops[idx].visible)
            while stack:
                j = stack.pop()
                if j not in seen:
                    seen.add(j)
                    stack.extend(ops[j].visible)
            got = frozenset(seen)
            cache[("past", idx)] = got
        return got

    def _causally_closed(self, ops, applied, cache) -> bool:
        return all(self._causal_past(ops, idx, cache) <= applied
                   for idx in applied)

    # -- per-history checks -------------------------------------------------

    def _check_history(self, ops: List[OpNode]):
        self.histories += 1
        messages = frozenset(o.message for o in ops)
        if len(messages) != len(ops):
            self.failures.append("duplicate effect messages in %r" % (ops,))
            return
        verdict = self._multiset_cache.get(messages)
        if verdict is None:
            verdict = self._converged_membership(tuple(sorted(
                messages, key=lambda m: (m.initiator, m.vector))))
            self._multiset_cache[messages] = verdict
        ok, membership = verdict
        if not ok:
            self.failures.append("non-convergent under permutation: %r" % (ops,))
            return
        expected = phase_oracle_membership(ops)
        if membership != expected:
            self.failures.append(
                "membership %r but oracle predicts %r for %r"
                % (membership, expected, ops))
        if self.causal_only:
            self._check_basic_agreement(ops)

    def _converged_membership(self, messages):
        """Check every delivery interleaving of the full message set.

        Dynamic programming over subsets: reachable[S] is the set of
        distinct states a replica can be in after applying exactly the
        messages in S, in any order.  Covers all |S|! interleavings while
        only ever extending distinct states.  Converged iff the full set
        reaches exactly one state.
        """
        k = len(messages)
        empty = OptRwset(0, self.n)
        reachable = {0: {empty.state_signature(): empty}}
        for mask in range(1, 1 << k):
            states = {}
            for i in range(k):
                if not mask >> i & 1:
                    continue
                for prev in reachable[mask ^ (1 << i)].values():
                    nxt = _clone_opt(prev)
                    nxt.apply(messages[i])
                    states.setdefault(nxt.state_signature(), nxt)
            reachable[mask] = states
        final = reachable[(1 << k) - 1]
        if len(final) != 1:
            return (False, None)
        return (True, next(iter(final.values())).lookup(KEY))

    def _check_basic_agreement(self, ops: List[OpNode]):
        """Basic (tag-set) and optimized sets agree on causal schedules."""
        basic_msgs = self._basic_messages(ops)
        past = {}
        cache = {}
        for o in ops:
            past[o.idx] = self._causal_past(ops, o.idx, cache) | {o.idx}
        for order in self._linear_extensions(ops, past):
            b = BasicRwset(0, self.n)
            o = OptRwset(0, self.n)
            for idx in order:
                b.apply(basic_msgs[idx])
                o.apply(ops[idx].message)
                if b.lookup(KEY) != o.lookup(KEY):
                    self.failures.append(
                        "basic/optimized disagree after %r in order %r"
                        % (idx, order))
                    return

    @staticmethod
    def _basic_messages(ops: List[OpNode]):
        msgs = {}
        for o in ops:
            tag = (o.replica, o.idx)
            if o.kind == "rmv":
                msgs[o.idx] = EffectMessage("rmv", KEY, o.replica, tag, tag=tag)
            else:
                hr = frozenset((ops[j].replica, j) for j in o.visible
                               if ops[j].kind == "rmv")
                msgs[o.idx] = EffectMessage("add", KEY, o.replica, tag, tags=hr)
        return msgs

    @staticmethod
    def _linear_extensions(ops, past):
        """All delivery orders consistent with the causal order."""
        n = len(ops)

        def rec(placed, remaining):
            if not remaining:
                yield tuple(placed)
                return
            for idx in list(remaining):
                if past[idx] - {idx} <= set(placed):
                    placed.append(idx)
                    remaining.remove(idx)
                    yield from rec(placed, remaining)
                    remaining.add(idx)
                    placed.pop()

        yield from rec([], set(range(n)))

    @property
    def ok(self) -> bool:
        return not self.failures


# -- randomized convergence harness ------------------------------------------

def run_random_trial(factory, n_replicas: int, n_ops: int, seed: int,
                     causal: bool = False, key_pool: int = 8,
                     collect_messages: bool = False):
    """Issue valid random ops and deliver them in random (or random causally
    consistent) order until quiescence; returns the per-replica signatures
    and, optionally, the full message list.
    """
    rng = random.Random(seed)
    replicas = [factory(i, n_replicas) for i in range(n_replicas)]
    pending = [[] for _ in range(n_replicas)]   # (sender, seq, deps, msg)
    sent = [0] * n_replicas
    applied = [[0] * n_replicas for _ in range(n_replicas)]
    messages = []
    issued = 0

    def deliverable(r, item):
        sender, seq, deps, _ = item
        if applied[r][sender] != seq - 1:
            return False
        return all(applied[r][k] >= deps[k] for k in range(n_replicas) if k != sender)

    def deliver(r, i):
        sender, seq, deps, msg = pending[r].pop(i)
        replicas[r].apply(msg)
        applied[r][sender] += 1

    supports_inc = hasattr(replicas[0], "get_pri")

    def try_issue():
        nonlocal issued
        r = rng.randrange(n_replicas)
        key = rng.randrange(key_pool)
        rep = replicas[r]
        if not rep.lookup(key):
            kind, arg = "add", rng.randint(0, 100)
        elif supports_inc and rng.random() < 0.5:
            kind, arg = "inc", rng.randint(-50, 50)
        else:
            kind, arg = "rmv", None
        msg = rep.prepare(kind, key, arg)
        sent[r] += 1
        item = (r, sent[r], tuple(applied[r]), msg)
        messages.append(msg)
        for q in range(n_replicas):
            pending[q].append(item)
        issued += 1

    while issued < n_ops or any(pending):
        want_issue = issued < n_ops and (not any(pending) or rng.random() < 0.4)
        if want_issue:
            try_issue()
            continue
        # random (optionally causal) delivery
        r = rng.choice([q for q in range(n_replicas) if pending[q]])
        if causal:
            idxs = [i for i, it in enumerate(pending[r]) if deliverable(r, it)]
            deliver(r, idxs[rng.randrange(len(idxs))])
        else:
            deliver(r, rng.randrange(len(pending[r])))

    sigs = [rep.state_signature() for rep in replicas]
    if collect_messages:
        return sigs, messages
    return sigs
