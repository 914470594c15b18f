"""Deterministic simulator: scheduling, determinism, causal buffering."""

import pytest

from rwcrdc.addwin import AddWinCrpqReplica
from rwcrdc.crpq import CrpqReplica
from rwcrdc.simnet import DelayModel, Simulation, run_script, spawn


def test_spawn_replica_counts():
    assert spawn(3, 3, DelayModel(), 0, CrpqReplica).n == 9
    assert spawn(1, 1, DelayModel(), 0, CrpqReplica).n == 1
    sim = spawn(3, 1, DelayModel(), 0, CrpqReplica)
    assert sim.n == 3
    assert sim.dc_of == [0, 1, 2]


def test_spawn_rejects_bad_counts():
    with pytest.raises(ValueError):
        spawn(0, 3, DelayModel(), 0, CrpqReplica)
    with pytest.raises(ValueError):
        spawn(3, 0, DelayModel(), 0, CrpqReplica)
    with pytest.raises(ValueError):
        spawn(1, 1, DelayModel(), 0, CrpqReplica, delivery_mode="best-effort")


def test_delay_floor():
    dm = DelayModel(inter_dc=(0.2, 50.0), intra_dc=(0.2, 50.0))
    import random
    rng = random.Random(0)
    assert all(dm.sample(rng, False) >= 0.1 for _ in range(500))


def test_submit_schedules_one_delivery_per_replica():
    sim = spawn(1, 2, DelayModel(), 0, CrpqReplica)
    rec = sim.submit(0, "add", "x", 5, at_time=0.0)
    assert rec.accepted
    assert len(sim._heap) == 2


def test_rejection_is_a_value():
    sim = spawn(1, 2, DelayModel(), 0, CrpqReplica)
    rec = sim.submit(0, "rmv", "x", at_time=0.0)
    assert not rec.accepted
    assert sim._heap == []


def test_self_delivery_is_delayed():
    sim = spawn(1, 1, DelayModel(intra_dc=(10.0, 0.0)), 0, CrpqReplica)
    sim.submit(0, "add", "x", 5, at_time=0.0)
    assert not sim.query(0, "lookup", key="x", at_time=5.0)
    assert sim.query(0, "lookup", key="x", at_time=10.0)


def test_quiescence_converges():
    sim = spawn(2, 2, DelayModel(), 42, CrpqReplica)
    for i in range(30):
        sim.submit(i % 4, "add", i, i, at_time=float(i))
    sim.run_to_quiescence()
    assert sim.converged()


def test_identical_seeds_identical_logs():
    def run(seed):
        sim = spawn(2, 2, DelayModel(), seed, CrpqReplica)
        for i in range(40):
            sim.submit(i % 4, "add", i % 7, i, at_time=float(i))
            if i % 5 == 0:
                sim.query(0, "get_max", at_time=float(i))
        sim.run_to_quiescence()
        return sim.log.records, sim.signatures()

    assert run(7) == run(7)
    assert run(7) != run(8)


def test_causal_mode_buffers_until_dependencies_arrive():
    # the add-win queue breaks without causal delivery; this run would have
    # rmv-before-add interleavings if the buffer did not hold them back
    sim = spawn(3, 1, DelayModel(inter_dc=(80.0, 40.0)), 3, AddWinCrpqReplica,
                delivery_mode="causal")
    t = 0.0
    for i in range(25):
        sim.submit(i % 3, "add", i % 5, i, at_time=t)
        t += 1.0
        sim.run_until(t * 4)
        if sim.replicas[i % 3].lookup(i % 5):
            sim.submit(i % 3, "rmv", i % 5, at_time=t * 4)
    sim.run_to_quiescence()
    assert sim.converged()
    assert all(not b for b in sim._buffers)


def test_script_runs_and_converges():
    sim = run_script(spawn(1, 2, DelayModel(), 0, CrpqReplica), """
        # comment and blank lines are fine

        0   0 add e 10
        5   0 inc e 3
        10  1 rmv e
    """)
    assert sim.converged()
    assert not sim.replicas[0].lookup("e")


def test_script_delay_overrides_are_stateful():
    sim = spawn(1, 2, DelayModel(), 0, CrpqReplica)
    run_script(sim, """
        delay 0 1 500
        0 0 add e 10
    """)
    assert sim.delay_overrides[(0, 1)] == 500.0


def test_script_parse_errors():
    for bad in ("0 0 pop e", "0 0 add", "delay 0 1", "5 0 add e 1\n1 0 add f 1"):
        with pytest.raises(ValueError):
            run_script(spawn(1, 2, DelayModel(), 0, CrpqReplica), bad)
