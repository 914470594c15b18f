"""Deterministic discrete-event network simulator.

Hosts n replicas of one replicated collection.  Every prepared effect
message is delivered to every replica (the initiator included) after a
normally distributed delay: intra-data-center parameters when source and
target share a data center, inter-data-center otherwise, clamped below at
0.1 ms so delays stay positive; nothing is ever lost.  Events are processed
in (delivery time, global sequence) order, so two runs with the same
configuration, seed and submission trace are identical.

In causal mode deliveries are buffered until every message the sender had
applied at prepare time has been applied at the receiver (vector timestamps
over per-sender send counts).  Self-delivery goes through the same path as
any other message, so a replica's own update becomes visible to its queries
only after the intra-data-center delay.

Scripted schedules drive hand-written scenarios from plain text, one
directive per line:

    <time_ms> <replica> add <key> <value>
    <time_ms> <replica> inc <key> <delta>
    <time_ms> <replica> rmv <key>
    delay <from> <to> <ms>        # fixed delay for later <from>-><to> sends

Delay overrides take effect for submissions after the line, in file order.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Callable, Optional

from .messages import EffectMessage, OperationRejected
from .metrics import ClientLog

MIN_DELAY_MS = 0.1


@dataclass(frozen=True)
class DelayModel:
    inter_dc: tuple = (50.0, 10.0)   # (mean ms, stddev ms)
    intra_dc: tuple = (10.0, 2.0)

    def sample(self, rng: random.Random, same_dc: bool) -> float:
        mean, std = self.intra_dc if same_dc else self.inter_dc
        return max(MIN_DELAY_MS, rng.gauss(mean, std))


@dataclass(frozen=True)
class Envelope:
    sender: int
    send_seq: int        # per-sender sequence number, from 1
    deps: tuple          # messages-per-sender applied at the sender at prepare
    message: EffectMessage


class Simulation:
    """n_dcs x replicas_per_dc replicas behind one deterministic event queue."""

    def __init__(self, n_dcs: int, replicas_per_dc: int, delay_model: DelayModel,
                 seed: int, replica_factory: Callable[[int, int], object],
                 causal: bool = False):
        if n_dcs < 1 or replicas_per_dc < 1:
            raise ValueError("data center and replica counts must be >= 1")
        self.n = n_dcs * replicas_per_dc
        self.dc_of = [i // replicas_per_dc for i in range(self.n)]
        self.delay_model = delay_model
        self.causal = causal
        self.rng = random.Random(seed)
        self.replicas = [replica_factory(i, self.n) for i in range(self.n)]
        self.now = 0.0
        self.log = ClientLog()
        self.delay_overrides = {}    # (src, dst) -> fixed ms
        self._heap = []              # (time, seq, target, envelope)
        self._event_seq = 0
        self._sent = [0] * self.n
        self._applied = [[0] * self.n for _ in range(self.n)]  # [replica][sender]
        self._buffers = [[] for _ in range(self.n)]

    # -- submission ---------------------------------------------------------

    def _delay(self, src: int, dst: int) -> float:
        fixed = self.delay_overrides.get((src, dst))
        if fixed is not None:
            return fixed
        return self.delay_model.sample(self.rng, self.dc_of[src] == self.dc_of[dst])

    def submit(self, replica: int, kind: str, key, arg=None,
               at_time: Optional[float] = None):
        """Prepare an update at a replica and broadcast its effect.

        Returns the logged OpRecord; rejections are values (accepted=False),
        not faults.  Submissions must be given in non-decreasing time order.
        """
        at_time = self.now if at_time is None else at_time
        self.run_until(at_time)
        try:
            msg = self.replicas[replica].prepare(kind, key, arg)
        except OperationRejected:
            return self.log.log_op(at_time, replica, kind, key, arg, False)
        self._sent[replica] += 1
        env = Envelope(replica, self._sent[replica],
                       tuple(self._applied[replica]), msg)
        for target in range(self.n):
            self._event_seq += 1
            heapq.heappush(self._heap,
                           (at_time + self._delay(replica, target),
                            self._event_seq, target, env))
        return self.log.log_op(at_time, replica, kind, key, arg, True)

    def query(self, replica: int, what: str, key=None,
              at_time: Optional[float] = None):
        """Run a side-effect-free query against one replica's current state."""
        at_time = self.now if at_time is None else at_time
        self.run_until(at_time)
        r = self.replicas[replica]
        if what == "get_max":
            try:
                result = r.get_max()
            except OperationRejected:
                result = None
            self.log.log_query(at_time, replica, result)
            return result
        if what == "lookup":
            return r.lookup(key)
        if what == "empty":
            return r.empty()
        if what == "get_pri":
            return r.get_pri(key)
        raise ValueError("unknown query %r" % what)

    # -- event loop -----------------------------------------------------------

    def _deliverable(self, replica: int, env: Envelope) -> bool:
        applied = self._applied[replica]
        if applied[env.sender] != env.send_seq - 1:
            return False
        for k, need in enumerate(env.deps):
            if k != env.sender and applied[k] < need:
                return False
        return True

    def _apply(self, replica: int, env: Envelope):
        if self.causal:
            assert self._deliverable(replica, env), "causal delivery monitor tripped"
        self.replicas[replica].apply(env.message)
        self._applied[replica][env.sender] += 1

    def _deliver(self, replica: int, env: Envelope):
        if self.causal and not self._deliverable(replica, env):
            self._buffers[replica].append(env)
            return
        self._apply(replica, env)
        if self.causal and self._buffers[replica]:
            self._drain(replica)

    def _drain(self, replica: int):
        buf = self._buffers[replica]
        progressed = True
        while progressed and buf:
            progressed = False
            for i, env in enumerate(buf):
                if self._deliverable(replica, env):
                    del buf[i]
                    self._apply(replica, env)
                    progressed = True
                    break

    def run_until(self, t: float):
        """Apply every event with delivery time <= t."""
        heap = self._heap
        while heap and heap[0][0] <= t:
            when, _, target, env = heapq.heappop(heap)
            self.now = when
            self._deliver(target, env)
        self.now = max(self.now, t)

    def run_to_quiescence(self):
        """Apply every outstanding event; fails if anything stays buffered."""
        heap = self._heap
        while heap:
            when, _, target, env = heapq.heappop(heap)
            self.now = when
            self._deliver(target, env)
        stuck = sum(len(b) for b in self._buffers)
        if stuck:
            raise RuntimeError("%d messages buffered forever; causal stamping is broken" % stuck)

    # -- inspection ------------------------------------------------------------

    def signatures(self):
        return [r.state_signature() for r in self.replicas]

    def converged(self) -> bool:
        sigs = self.signatures()
        return all(s == sigs[0] for s in sigs[1:])


def spawn(n_dcs: int, replicas_per_dc: int, delay_model: DelayModel, seed: int,
          replica_factory, delivery_mode: str = "arbitrary") -> Simulation:
    """Construct a simulation; delivery_mode is 'causal' or 'arbitrary'."""
    if delivery_mode not in ("causal", "arbitrary"):
        raise ValueError("delivery_mode must be 'causal' or 'arbitrary'")
    return Simulation(n_dcs, replicas_per_dc, delay_model, seed, replica_factory,
                      causal=(delivery_mode == "causal"))


def run_script(sim: Simulation, text: str):
    """Execute a scripted schedule against a simulation.

    Returns the simulation after running it to quiescence.
    """
    last_t = 0.0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "delay":
            if len(parts) != 4:
                raise ValueError("line %d: delay needs <from> <to> <ms>" % lineno)
            src, dst, ms = int(parts[1]), int(parts[2]), float(parts[3])
            sim.delay_overrides[(src, dst)] = ms
            continue
        if len(parts) < 3:
            raise ValueError("line %d: expected <time> <replica> <op> ..." % lineno)
        t, replica, op = float(parts[0]), int(parts[1]), parts[2]
        if t < last_t:
            raise ValueError("line %d: script times must be non-decreasing" % lineno)
        last_t = t
        if op in ("add", "inc"):
            if len(parts) != 5:
                raise ValueError("line %d: %s needs <key> <value>" % (lineno, op))
            sim.submit(replica, op, parts[3], int(parts[4]), at_time=t)
        elif op == "rmv":
            if len(parts) != 4:
                raise ValueError("line %d: rmv needs <key>" % lineno)
            sim.submit(replica, op, parts[3], at_time=t)
        else:
            raise ValueError("line %d: unknown op %r" % (lineno, op))
    sim.run_to_quiescence()
    return sim
