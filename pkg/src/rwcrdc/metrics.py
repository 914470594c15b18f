"""Client-side log and consistency metrics.

Clients log every served operation and query in submission order; that total
order is replayed through a sequential priority queue to obtain the "true"
answer for each probe.  Consistency is then summarized as the mean absolute
priority error (x_bar) of the probes and the fraction of probes whose
returned priority was wrong (error ratio f).  Probes that land on a truly
empty queue, or that a replica rejected, carry no defined error and are
counted separately instead of being folded into x_bar and f.

Metadata overhead is reported in stored units (vector coordinates, tags,
cancelled entries), not bytes, so the numbers are independent of the
runtime's object sizes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List, Optional, Tuple


@dataclass(frozen=True)
class OpRecord:
    index: int
    time: float
    replica: int
    kind: str        # 'add' | 'inc' | 'rmv'
    key: object
    arg: Optional[int]
    accepted: bool


@dataclass(frozen=True)
class QueryRecord:
    index: int
    time: float
    replica: int
    result: Optional[Tuple[object, int]]   # (id, priority); None if rejected


@dataclass
class ClientLog:
    records: list = field(default_factory=list)

    def log_op(self, time, replica, kind, key, arg, accepted) -> OpRecord:
        rec = OpRecord(len(self.records), time, replica, kind, key, arg, accepted)
        self.records.append(rec)
        return rec

    def log_query(self, time, replica, result) -> QueryRecord:
        rec = QueryRecord(len(self.records), time, replica, result)
        self.records.append(rec)
        return rec

    def probes(self) -> List[QueryRecord]:
        return [r for r in self.records if isinstance(r, QueryRecord)]


@dataclass
class MetricsReport:
    x_bar: float
    f: float
    probes_scored: int
    probes_empty: int      # truth was an empty queue
    probes_rejected: int   # replica rejected the probe
    rejected_ops: int

    @property
    def empty(self) -> bool:
        return self.probes_scored == 0


def replay_oracle(log: ClientLog) -> List[Optional[Tuple[object, int]]]:
    """Sequential truth for every probe, in log order.

    Folds the accepted updates of the log through a single sequential
    priority queue; updates that are invalid sequentially (add of a present
    key, inc/rmv of an absent one) are skipped.  Returns one entry per
    QueryRecord: the true (id, max priority), or None when the queue was
    empty at that point.
    """
    state = {}
    truths = []
    for rec in log.records:
        if isinstance(rec, QueryRecord):
            if state:
                best = min(state.items(), key=lambda kv: (-kv[1], kv[0]))
                truths.append((best[0], best[1]))
            else:
                truths.append(None)
        elif rec.accepted:
            if rec.kind == "add":
                if rec.key not in state:
                    state[rec.key] = rec.arg
            elif rec.kind == "inc":
                if rec.key in state:
                    state[rec.key] += rec.arg
            elif rec.kind == "rmv":
                state.pop(rec.key, None)
            else:
                raise ValueError("malformed log record kind %r" % rec.kind)
    return truths


def score(log: ClientLog, truths=None) -> MetricsReport:
    """Compare every probe against its sequential truth."""
    if truths is None:
        truths = replay_oracle(log)
    probes = log.probes()
    if len(probes) != len(truths):
        raise ValueError("probe/truth misalignment: %d probes, %d truths"
                         % (len(probes), len(truths)))
    scored = wrong = empties = rejected = 0
    abs_err_sum = 0.0
    for probe, truth in zip(probes, truths):
        if truth is None:
            empties += 1
            continue
        if probe.result is None:
            rejected += 1
            continue
        scored += 1
        err = abs(probe.result[1] - truth[1])
        abs_err_sum += err
        if probe.result[1] != truth[1]:
            wrong += 1
    rejected_ops = sum(1 for r in log.records
                       if isinstance(r, OpRecord) and not r.accepted)
    if scored == 0:
        return MetricsReport(0.0, 0.0, 0, empties, rejected, rejected_ops)
    return MetricsReport(abs_err_sum / scored, wrong / scored,
                         scored, empties, rejected, rejected_ops)


@dataclass(frozen=True)
class OverheadSample:
    t_ms: float
    overhead_per_element: float   # metadata units / current element count
    metadata_units: int
    elements: int
    tracked_units_per_entry: float  # units per stored metadata entry

    @property
    def flagged_empty(self) -> bool:
        return self.elements == 0


def sample_overhead(t_ms: float, replicas) -> OverheadSample:
    """Average metadata overhead across replicas at one instant."""
    units = sum(r.metadata_units() for r in replicas)
    elements = sum(r.element_count() for r in replicas)
    entries = sum(r.tracked_entries() for r in replicas) if hasattr(replicas[0], "tracked_entries") else 0
    per_elem = (units / elements) if elements else 0.0
    per_entry = (units / entries) if entries else 0.0
    return OverheadSample(t_ms, per_elem, units, elements, per_entry)


def write_probe_csv(path, log: ClientLog, truths=None):
    """CSV: probe_index,replica,returned_pri,true_pri,abs_err."""
    if truths is None:
        truths = replay_oracle(log)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["probe_index", "replica", "returned_pri", "true_pri", "abs_err"])
        for i, (probe, truth) in enumerate(zip(log.probes(), truths)):
            returned = probe.result[1] if probe.result else ""
            true_pri = truth[1] if truth else ""
            err = abs(returned - true_pri) if probe.result and truth else ""
            w.writerow([i, probe.replica, returned, true_pri, err])


def write_overhead_csv(path, rows):
    """CSV rows of (t_ms, system, overhead_per_element)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ms", "system", "overhead_per_element"])
        for t_ms, system, ovh in rows:
            w.writerow(["%.3f" % t_ms, system, "%.6f" % ovh])
