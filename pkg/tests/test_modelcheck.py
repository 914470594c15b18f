"""Small-model enumeration and the phase oracle."""

from rwcrdc.modelcheck import (ExhaustiveChecker, OpNode,
                               causal_remove_history, phase_oracle_membership,
                               run_random_trial)
from rwcrdc.rwset import OptRwset


def node(idx, replica, kind, visible):
    return OpNode(idx, replica, kind, frozenset(visible), message=None)


def test_oracle_on_hand_built_graphs():
    # add only
    assert phase_oracle_membership([node(0, 0, "add", [])])
    # add then remove that saw it
    ops = [node(0, 0, "add", []), node(1, 1, "rmv", [0])]
    assert not phase_oracle_membership(ops)
    # re-add that saw the remove: present
    ops.append(node(2, 0, "add", [0, 1]))
    assert phase_oracle_membership(ops)
    # a second remove unseen by any add: absent again
    ops.append(node(3, 1, "rmv", [0, 1]))
    assert not phase_oracle_membership(ops)


def test_remove_history_is_transitive():
    ops = [node(0, 0, "add", []),
           node(1, 1, "rmv", [0]),
           node(2, 2, "add", [1]),     # saw the rmv only directly
           node(3, 0, "rmv", [2]),     # saw rmv 1 only through add 2
           node(4, 1, "add", [3])]
    assert causal_remove_history(ops, 4) == frozenset({1, 3})
    assert causal_remove_history(ops, 2) == frozenset({1})
    assert causal_remove_history(ops, 0) == frozenset()


def test_exhaustive_small_model_passes():
    c = ExhaustiveChecker(n_replicas=3, max_ops=4).run()
    assert c.ok, c.failures[:3]
    assert c.histories == 636


def test_exhaustive_causal_agreement_passes():
    c = ExhaustiveChecker(n_replicas=3, max_ops=4, causal_only=True).run()
    assert c.ok, c.failures[:3]


def test_branch_dedup_is_lossless_at_small_size():
    # the deduplicated run and the raw run must agree on every verdict
    full = ExhaustiveChecker(n_replicas=2, max_ops=5, dedup=False).run()
    slim = ExhaustiveChecker(n_replicas=2, max_ops=5, dedup=True).run()
    assert full.ok and slim.ok
    assert full.histories >= slim.histories


def test_checker_catches_a_broken_design():
    class LastWriterWins(OptRwset):
        # deliberately order-sensitive: ignores the phase gate
        def apply(self, msg):
            if msg.kind == "add":
                self.elements.add(msg.key)
                self.vectors[msg.key] = msg.vector
            else:
                self.elements.discard(msg.key)
                self.vectors[msg.key] = msg.vector

    import rwcrdc.modelcheck as mc
    original = mc.OptRwset
    mc.OptRwset = LastWriterWins
    try:
        c = ExhaustiveChecker(n_replicas=2, max_ops=3).run()
    finally:
        mc.OptRwset = original
    assert not c.ok


def test_random_trials_converge_for_both_queues():
    from rwcrdc.addwin import AddWinCrpqReplica
    from rwcrdc.crpq import CrpqReplica
    for seed in range(10):
        assert len(set(run_random_trial(CrpqReplica, 4, 60, seed))) == 1
        assert len(set(run_random_trial(AddWinCrpqReplica, 4, 60, seed,
                                        causal=True))) == 1
