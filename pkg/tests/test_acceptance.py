"""End-to-end acceptance suite.

One test per shipping criterion; each prints a single
``ACCEPTANCE n (...): PASS|FAIL`` line (visible with ``pytest -s``, or in
the captured output of a failing test).  The trend criteria (5 and 6) run
full 100,000-op simulations and dominate the runtime of this file.
"""

import contextlib
import os
import random
import time

from rwcrdc import cli, figures
from rwcrdc.addwin import AddWinCrpqReplica
from rwcrdc.crpq import CrpqReplica
from rwcrdc.experiment import run_trial
from rwcrdc.modelcheck import ExhaustiveChecker, run_random_trial
from rwcrdc.simnet import DelayModel
from rwcrdc.workload import MIXES, WorkloadConfig, WorkloadGenerator


@contextlib.contextmanager
def _criterion(num, name):
    try:
        yield
    except BaseException:
        print("ACCEPTANCE %d (%s): FAIL" % (num, name))
        raise
    print("ACCEPTANCE %d (%s): PASS" % (num, name))


# -- shared desk-scale cells (100k ops, inc-dominant, seed 0) -----------------

DESK_OPS = 100_000
_cells = {}


def _cell(system, rate=10_000.0, inter=(50.0, 10.0), intra=(10.0, 2.0),
          replicas_per_dc=3):
    key = (system, rate, inter, intra, replicas_per_dc)
    if key not in _cells:
        wl = WorkloadConfig(pattern="inc_dominant", total_ops=DESK_OPS,
                            rate=rate, seed=0)
        _cells[key] = run_trial(system, wl, 3, replicas_per_dc,
                                DelayModel(inter_dc=inter, intra_dc=intra),
                                seed=0)
    return _cells[key]


def _replica_point(rpd):
    # replica sweep: each replica serves its own clients, so the total
    # rate scales with the replica count (per-replica rate constant)
    return dict(replicas_per_dc=rpd, rate=10_000.0 * rpd / 3.0)


def _inversions(values):
    return sum(1 for a, b in zip(values, values[1:]) if b < a)


def _spearman(values):
    """Rank correlation of a series against its index (ties get mean rank)."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    mean = (n + 1) / 2.0
    cov = sum((ranks[i] - mean) * (i + 1 - mean) for i in range(n))
    var_r = sum((r - mean) ** 2 for r in ranks)
    var_i = sum((i + 1 - mean) ** 2 for i in range(n))
    return cov / (var_r * var_i) ** 0.5


# -----------------------------------------------------------------------------

def test_acceptance_1_figure_fidelity():
    with _criterion(1, "scripted scenario fidelity"):
        start = time.time()
        names = figures.verify_all()
        elapsed = time.time() - start
        assert len(names) == 3
        assert elapsed < 1.0


def test_acceptance_2_convergence_property_suite():
    with _criterion(2, "random convergence, 1000 trials"):
        start = time.time()
        rng = random.Random(42)
        for trial in range(500):
            n = rng.randint(2, 5)
            ops = rng.randint(20, 200)
            sigs = run_random_trial(CrpqReplica, n, ops, seed=trial)
            assert len(set(sigs)) == 1, "remove-win diverged, trial %d" % trial
        for trial in range(500):
            n = rng.randint(2, 5)
            ops = rng.randint(20, 200)
            sigs = run_random_trial(AddWinCrpqReplica, n, ops,
                                    seed=10_000 + trial, causal=True)
            assert len(set(sigs)) == 1, "add-win diverged, trial %d" % trial
        assert time.time() - start < 60.0


def test_acceptance_3_exhaustive_semantics_oracle():
    with _criterion(3, "exhaustive model check vs phase oracle"):
        arb = ExhaustiveChecker(n_replicas=3, max_ops=6).run()
        assert arb.ok, arb.failures[:3]
        assert arb.histories > 10_000
        causal = ExhaustiveChecker(n_replicas=3, max_ops=6,
                                   causal_only=True).run()
        assert causal.ok, causal.failures[:3]
        assert causal.histories > 5_000


def test_acceptance_4_permutation_and_duplicate_redelivery():
    with _criterion(4, "permutation + duplicate rmv redelivery"):
        for trial in range(20):
            rng = random.Random(1000 + trial)
            n_replicas = rng.randint(2, 4)
            _, messages = run_random_trial(
                CrpqReplica, n_replicas=n_replicas,
                n_ops=rng.randint(30, 80), seed=trial,
                collect_messages=True)
            rmvs = [m for m in messages if m.kind == "rmv"]
            signatures = set()
            for _ in range(100):
                batch = list(messages)
                batch.extend(rng.choice(rmvs)
                             for _ in range(rng.randint(1, 5)) if rmvs)
                rng.shuffle(batch)
                replica = CrpqReplica(0, n_replicas)
                for msg in batch:
                    replica.apply(msg)
                signatures.add(replica.state_signature())
            assert len(signatures) == 1, "trial %d: %d states" % (
                trial, len(signatures))


def test_acceptance_5_overhead_trends():
    with _criterion(5, "metadata overhead trends"):
        rmv = _cell("rmv_win")
        series = [s.overhead_per_element for s in rmv.overhead]
        settled = series[len(series) // 2:]
        assert settled[0] > 0
        assert settled[-1] / settled[0] < 1.2, settled

        add = _cell("add_win")
        growth = [s.metadata_units for s in add.overhead]
        assert _spearman(growth) > 0.9, growth

        # per-tracked-entry cost is exactly the replica count
        for rpd in (1, 2, 3, 4, 5):
            n = 3 * rpd
            res = _cell("rmv_win", **_replica_point(rpd))
            assert res.overhead[-1].tracked_units_per_entry == float(n)


def test_acceptance_6_consistency_trends():
    with _criterion(6, "staleness grows with rate/delay/replicas"):
        sweeps = {
            "rate": [dict(rate=float(r))
                     for r in (500, 1000, 2500, 5000, 10_000)],
            "delay": [dict(inter=(float(d), d / 5.0),
                           intra=(d / 5.0, d / 25.0))
                      for d in (20, 60, 140, 260, 380)],
            "replicas": [_replica_point(k) for k in (1, 2, 3, 4, 5)],
        }
        for knob, points in sweeps.items():
            for system in ("rmv_win", "add_win"):
                results = [_cell(system, **kwargs) for kwargs in points]
                x_bar = [r.report.x_bar for r in results]
                f = [r.report.f for r in results]
                assert _inversions(x_bar) <= 1, (knob, system, x_bar)
                assert _inversions(f) <= 1, (knob, system, f)

        # remove-win answers are at least as fresh as add-win, within 2x
        rmv = _cell("rmv_win").report.x_bar
        add = _cell("add_win").report.x_bar
        assert rmv <= add <= 2.0 * rmv, (rmv, add)


def test_acceptance_7_deterministic_csv_output(tmp_path):
    with _criterion(7, "byte-identical CSV reruns"):
        argv = ["--ops", "2000", "--crdc", "both", "--seed", "11",
                "--dcs", "2", "--replicas-per-dc", "2"]
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert cli.main(argv + ["--out", str(out)]) == 0
            outs.append(out)
        for name in ("trials.csv", "summary.csv", "overhead.csv",
                     "probes.csv"):
            a = (outs[0] / name).read_bytes()
            b = (outs[1] / name).read_bytes()
            assert a == b, name


def test_acceptance_8_workload_statistics():
    with _criterion(8, "workload mix and conflict-rate statistics"):
        for pattern, (p_add, p_rmv, p_inc) in MIXES.items():
            gen = WorkloadGenerator(
                WorkloadConfig(pattern=pattern, total_ops=12_000, seed=5), 3)
            for when, replica, kind, key, arg in gen:
                if kind != "get_max":
                    gen.feedback(kind, key, True)
            total = sum(gen.stats.drawn.values())
            assert total >= 10_000
            assert abs(gen.stats.drawn["add"] / total - p_add) < 0.01
            assert abs(gen.stats.drawn["rmv"] / total - p_rmv) < 0.01
            assert abs(gen.stats.drawn["inc"] / total - p_inc) < 0.01
        gen = WorkloadGenerator(
            WorkloadConfig(pattern="add_rmv_dominant", total_ops=30_000,
                           seed=6), 3)
        for when, replica, kind, key, arg in gen:
            if kind != "get_max":
                gen.feedback(kind, key, True)
        rate = gen.stats.conflict_retargets / gen.stats.conflict_opportunities
        assert abs(rate - 0.15) < 0.02, rate
