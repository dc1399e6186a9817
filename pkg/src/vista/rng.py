"""Seeded randomness with labeled stream splitting.

All stochastic draws in the package flow through Philox generators keyed by
(master seed, label tuple).  Philox is counter-based and its streams are
stable across platforms for a fixed numpy version, so a (config, seed) pair
pins every sampled number in a run.

Label layout used by the drivers (all labels are small non-negative ints):

    (STREAM_INIT,)                      parameter initialization for a run
    (STREAM_LOSS, epoch)                recorded loss evaluation in an epoch
    (STREAM_GRAD, epoch, i, side)       gradient shift evaluations (side 0/1)
    (STREAM_BASELINE, k)                parity shots at time step k
    (STREAM_REPLICA, r)                 derived per-replica seeds in sweeps
    (STREAM_STAGE, k)                   derived per-stage seeds in cascades
"""

import numpy as np

STREAM_INIT = 0
STREAM_LOSS = 1
STREAM_GRAD = 2
STREAM_BASELINE = 3
STREAM_REPLICA = 4
STREAM_STAGE = 5


def stream(seed, *key):
    """Generator for the stream identified by (seed, key)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """Deterministic 63-bit child seed for a labeled sub-experiment."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
