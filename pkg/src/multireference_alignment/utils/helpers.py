#!/usr/bin/env python3
"""
Utility functions shared by the solvers, services and CLI
"""

import subprocess
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, TypeVar, Union

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

SeedLike = Union[int, np.random.SeedSequence, None]

# Piecewise-constant preset of length 20 with unequal plateaus
HAAR_LIKE_LEVELS = (
    (4, 1.0),
    (3, -0.5),
    (5, 2.0),
    (2, 0.0),
    (4, -1.5),
    (2, 0.8),
)


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Create a PCG64 generator from an integer seed or seed sequence"""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_generators(seed: SeedLike, count: int) -> List[np.random.Generator]:
    """
    Split a seed into ``count`` independent generators

    Child i of ``SeedSequence(seed)`` always drives trial i, so results do not
    depend on how trials are scheduled across threads.
    """
    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in sequence.spawn(count)]


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit integer seed from a generator"""
    return int(rng.integers(0, 2**63 - 1))


def run_ordered(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Map ``func`` over ``items``, concurrently when threads > 1, results in submission order"""
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def pairwise_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Combine partial sums with a fixed balanced binary tree"""
    if not parts:
        raise ValueError("pairwise_sum needs at least one part")
    level = list(parts)
    while len(level) > 1:
        merged = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return level[0]


def haar_like_signal(scale: float = 1.0) -> np.ndarray:
    """Return the length-20 piecewise-constant preset signal"""
    values = np.concatenate([np.full(width, level) for width, level in HAAR_LIKE_LEVELS])
    return scale * values


def git_revision(path: Optional[Path] = None) -> str:
    """Return the current git revision, or 'unknown' outside a checkout"""
    cwd = Path(path) if path else Path(__file__).resolve().parent
    try:
        result = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=cwd,
            capture_output=True,
            text=True,
            timeout=5,
            check=False,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    revision = result.stdout.strip()
    return revision if result.returncode == 0 and revision else "unknown"


def geometric_grid(low: float, high: float, points: int) -> List[float]:
    """Geometrically spaced grid including both end points"""
    return [float(v) for v in np.geomspace(low, high, points)]


def linear_grid(low: float, high: float, points: int) -> List[float]:
    """Linearly spaced grid including both end points"""
    return [float(v) for v in np.linspace(low, high, points)]
