"""
Per-trial random streams.

Trial t of a run seeded with `master_seed` always draws from
SeedSequence(master_seed, spawn_key=(t,)), so failure counts do not depend
on how trials are chunked or how many workers run them.
"""
import numpy as np


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(master_seed, trial_index))
