"""Replicated data collections with remove-win conflict resolution.

Operation-based replicated set, skeleton, and priority-queue designs whose
concurrent add/remove conflicts are resolved in favor of the remove, plus an
add-win baseline, a deterministic simulated network, a workload generator,
and consistency/overhead metrics for comparing the two designs.
"""

from .addwin import AddWinCrpqReplica
from .crpq import CrpqReplica
from .history_vector import has_unseen, increment, merge, zero
from .messages import (CausalDeliveryViolation, EffectMessage,
                       HookContractError, OperationRejected)
from .rwset import BasicRwset, OptRwset
from .simnet import DelayModel, Simulation, run_script, spawn
from .skeleton import Resolver, SkeletonReplica, assert_upd_commutes
from .workload import WorkloadConfig, WorkloadGenerator

__version__ = "0.1.0"

__all__ = [
    "AddWinCrpqReplica", "BasicRwset", "CausalDeliveryViolation",
    "CrpqReplica", "DelayModel", "EffectMessage", "HookContractError",
    "OperationRejected", "OptRwset", "Resolver", "Simulation",
    "SkeletonReplica", "WorkloadConfig", "WorkloadGenerator",
    "assert_upd_commutes", "has_unseen", "increment", "merge", "run_script",
    "spawn", "zero",
]
