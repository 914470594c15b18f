"""Workload generation for the experiment harness.

Two mix patterns are supported: increment-dominant (80% inc / 11% add /
9% rmv; adds slightly outnumber removes so the queue rarely empties) and
add/rmv-dominant (41% add / 39% rmv / 20% inc).  Keys come from a 200,000
key space by default; new elements get an initial priority in [0, 100] and
increments draw from [-50, 50].

The generator tracks which keys the client believes are present (the
accepted-op projection of the client log, fed back via ``feedback``) so it
never emits an inc or rmv whose precondition is false against that view.
To provoke add-add and add-rmv conflicts, whenever an add is drawn and some
add/rmv happened within the last ``conflict_window_ms``, the add is, with
``conflict_probability``, re-targeted onto one of those recent keys;
inc-rmv conflicts are frequent enough to occur on their own and are not
steered.  Submission times follow an exponential inter-arrival distribution
with mean 1000/rate ms.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

MIXES = {
    # kind -> probability, in (add, rmv, inc) order
    "inc_dominant": (0.11, 0.09, 0.80),
    "add_rmv_dominant": (0.41, 0.39, 0.20),
}


class RandomSet:
    """Set with O(1) add/discard/uniform-choice."""

    def __init__(self):
        self._items = []
        self._index = {}

    def __len__(self):
        return len(self._items)

    def __contains__(self, item):
        return item in self._index

    def add(self, item):
        if item not in self._index:
            self._index[item] = len(self._items)
            self._items.append(item)

    def discard(self, item):
        i = self._index.pop(item, None)
        if i is None:
            return
        last = self._items.pop()
        if i < len(self._items):
            self._items[i] = last
            self._index[last] = i

    def choice(self, rng: random.Random):
        return self._items[rng.randrange(len(self._items))]


@dataclass
class WorkloadConfig:
    pattern: str = "inc_dominant"
    total_ops: int = 100_000
    rate: float = 10_000.0            # ops per second
    key_space: int = 200_000
    init_value_range: tuple = (0, 100)
    inc_range: tuple = (-50, 50)
    conflict_window_ms: float = 10.0  # mean intra-DC delay
    conflict_probability: float = 0.15
    query_every: int = 10             # one get_max probe per this many updates
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in MIXES:
            raise ValueError("unknown workload pattern %r" % self.pattern)
        if abs(sum(MIXES[self.pattern]) - 1.0) > 1e-9:
            raise ValueError("mix ratios must sum to 1")
        if (self.init_value_range[0] > self.init_value_range[1]
                or self.inc_range[0] > self.inc_range[1]):
            raise ValueError("value ranges must be well ordered")


@dataclass
class WorkloadStats:
    drawn: dict = field(default_factory=lambda: {"add": 0, "rmv": 0, "inc": 0})
    substitutions: int = 0            # inc/rmv drawn on an empty queue
    conflict_opportunities: int = 0   # adds with a pairing candidate in window
    conflict_retargets: int = 0


class WorkloadGenerator:
    """Deterministic operation stream; pure function of seed + feedback."""

    def __init__(self, cfg: WorkloadConfig, n_replicas: int):
        self.cfg = cfg
        self.n_replicas = n_replicas
        self.rng = random.Random(cfg.seed)
        self.live = RandomSet()
        self.recent = deque()   # (time, key) of recent add/rmv ops
        self.stats = WorkloadStats()
        self.now = 0.0
        self._emitted = 0
        self._updates_since_probe = 0

    def __iter__(self):
        return self

    def __next__(self):
        """Next timed client op: (time, replica, kind, key, arg).

        kind 'get_max' marks a query probe (key and arg are None).
        """
        if self._emitted >= self.cfg.total_ops:
            raise StopIteration
        self._emitted += 1
        self.now += self.rng.expovariate(self.cfg.rate / 1000.0)
        replica = self.rng.randrange(self.n_replicas)

        if self._updates_since_probe >= self.cfg.query_every:
            self._updates_since_probe = 0
            return (self.now, replica, "get_max", None, None)
        self._updates_since_probe += 1

        kind = self._draw_kind()
        if kind == "add":
            key = self._pick_add_key()
            if key is None:
                # key space exhausted; fall back to removing something
                self.stats.substitutions += 1
                kind, key, arg = "rmv", self.live.choice(self.rng), None
            else:
                lo, hi = self.cfg.init_value_range
                arg = self.rng.randint(lo, hi)
        elif kind == "inc":
            key = self.live.choice(self.rng)
            lo, hi = self.cfg.inc_range
            arg = self.rng.randint(lo, hi)
        else:
            key, arg = self.live.choice(self.rng), None
        if kind in ("add", "rmv"):
            self._remember(key)
        return (self.now, replica, kind, key, arg)

    def _draw_kind(self) -> str:
        p_add, p_rmv, _ = MIXES[self.cfg.pattern]
        u = self.rng.random()
        kind = "add" if u < p_add else "rmv" if u < p_add + p_rmv else "inc"
        self.stats.drawn[kind] += 1
        if kind != "add" and not self.live:
            # nothing to target; substitute an add and log it
            self.stats.substitutions += 1
            kind = "add"
        return kind

    def _pick_add_key(self):
        candidates = self._window_keys()
        if candidates:
            self.stats.conflict_opportunities += 1
            if self.rng.random() < self.cfg.conflict_probability:
                self.stats.conflict_retargets += 1
                return candidates[self.rng.randrange(len(candidates))]
        if len(self.live) >= self.cfg.key_space:
            return None
        while True:
            key = self.rng.randrange(self.cfg.key_space)
            if key not in self.live:
                return key

    def _window_keys(self):
        cutoff = self.now - self.cfg.conflict_window_ms
        recent = self.recent
        while recent and recent[0][0] < cutoff:
            recent.popleft()
        return [k for _, k in recent]

    def _remember(self, key):
        self.recent.append((self.now, key))

    def feedback(self, kind: str, key, accepted: bool):
        """Report how the replica answered, keeping the live view honest."""
        if not accepted:
            return
        if kind == "add":
            self.live.add(key)
        elif kind == "rmv":
            self.live.discard(key)


def dump_script(ops) -> str:
    """Render generated update ops in the simulator's scripted format.

    Query probes have no script form and are skipped.
    """
    lines = []
    for when, replica, kind, key, arg in ops:
        if kind == "get_max":
            continue
        if arg is None:
            lines.append("%.3f %d %s %s" % (when, replica, kind, key))
        else:
            lines.append("%.3f %d %s %s %d" % (when, replica, kind, key, arg))
    return "\n".join(lines) + "\n"
