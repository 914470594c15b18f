"""Single-trial experiment runner: workload -> simulator -> metrics.

One trial wires a WorkloadGenerator to a Simulation of the chosen queue
flavor, runs the stream, probes get_max along the way, samples metadata
overhead at fixed simulated-time intervals, and scores the client log
against the sequential oracle.  Remove-win queues run under arbitrary
delivery; the add-win baseline needs causal delivery and gets it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from .addwin import AddWinCrpqReplica
from .crpq import CrpqReplica
from .metrics import MetricsReport, OverheadSample, replay_oracle, sample_overhead, score
from .simnet import DelayModel, spawn
from .workload import WorkloadConfig, WorkloadGenerator, WorkloadStats

SYSTEMS = {
    "rmv_win": (CrpqReplica, "arbitrary"),
    "add_win": (AddWinCrpqReplica, "causal"),
}


@dataclass
class TrialResult:
    system: str
    seed: int
    report: MetricsReport
    overhead: List[OverheadSample]
    workload_stats: WorkloadStats
    log: object = field(repr=False, default=None)

    @property
    def final_overhead(self) -> float:
        return self.overhead[-1].overhead_per_element if self.overhead else 0.0


def run_trial(system: str, workload_cfg: WorkloadConfig, n_dcs: int,
              replicas_per_dc: int, delay_model: DelayModel, seed: int,
              overhead_samples: int = 20, keep_log: bool = False) -> TrialResult:
    if system not in SYSTEMS:
        raise ValueError("unknown system %r (want rmv_win or add_win)" % system)
    factory, mode = SYSTEMS[system]
    sim = spawn(n_dcs, replicas_per_dc, delay_model, seed, factory,
                delivery_mode=mode)
    gen = WorkloadGenerator(workload_cfg, sim.n)

    # Sample overhead at evenly spaced simulated times over the whole run.
    expected_span = workload_cfg.total_ops * 1000.0 / workload_cfg.rate
    interval = expected_span / max(1, overhead_samples)
    next_sample = interval
    overhead = []

    for when, replica, kind, key, arg in gen:
        while when >= next_sample:
            sim.run_until(next_sample)
            overhead.append(sample_overhead(next_sample, sim.replicas))
            next_sample += interval
        if kind == "get_max":
            sim.query(replica, "get_max", at_time=when)
        else:
            rec = sim.submit(replica, kind, key, arg, at_time=when)
            gen.feedback(kind, key, rec.accepted)

    sim.run_to_quiescence()
    overhead.append(sample_overhead(sim.now, sim.replicas))
    report = score(sim.log, replay_oracle(sim.log))
    return TrialResult(system, seed, report, overhead, gen.stats,
                       log=sim.log if keep_log else None)
