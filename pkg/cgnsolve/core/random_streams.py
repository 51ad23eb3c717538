"""
Seeded, splittable random streams.

A single experiment seed fans out into named substreams (``dataset``, ``cluster``) and the
cluster stream fans out again into one generator per member, so results never depend on the
order in which members are sampled or on the worker count.
"""

import zlib
from typing import List

import numpy as np
import scipy.special

from cgnsolve.core.utils import ConfigError

STREAM_DATASET = "dataset"
STREAM_CLUSTER = "cluster"


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def named_seed_sequence(seed: int, name: str) -> np.random.SeedSequence:
    """SeedSequence for the substream ``name`` of ``seed``."""
    return np.random.SeedSequence([_check_seed(seed), zlib.crc32(name.encode("utf-8"))])


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Generator for the substream ``name`` of ``seed``."""
    return np.random.Generator(np.random.PCG64(named_seed_sequence(seed, name)))


def member_streams(seed: int, count: int, name: str = STREAM_CLUSTER) -> List[np.random.Generator]:
    """One independent generator per cluster member.

    Args:
        seed (int): Experiment seed.
        count (int): Number of members.
        name (str): Parent substream.

    Returns:
        List[np.random.Generator]: ``count`` generators, member ``j`` at position ``j``.
    """
    children = named_seed_sequence(seed, name).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def standard_normal_inverse_cdf(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws by inverse CDF on the uniform stream.

    ``ndtri`` is a fixed closed-form approximation, so the draws only depend on the uniform
    bit stream of PCG64 and are identical across platforms.
    """
    u = rng.random(size)
    # random() can return exactly 0.0
    u = np.clip(u, np.finfo(np.float64).tiny, 1.0 - np.finfo(np.float64).epsneg)
    return scipy.special.ndtri(u)
