"""Reproducible per-trial random streams.

A trial's stream is a pure function of ``(master_seed, trial_index)``:

1. ``z = master_seed + trial_index * 0x9E3779B97F4A7C15  (mod 2**64)``
2. ``seed = splitmix64_mix(z)``
3. the four 64-bit words of a xoshiro256** state are the next four outputs of
   a SplitMix64 sequence started at ``seed``.

xoshiro256** (Blackman & Vigna) only uses 64-bit shifts, xors, rotations and
wrapping multiplies, so the stream is bit-identical on every platform and in
both kernel backends.  Unit doubles are ``(x >> 11) * 2**-53``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_mix(z: int) -> int:
    """The SplitMix64 output finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_sequence(seed: int, count: int) -> list[int]:
    state = seed & MASK64
    out = []
    for _ in range(count):
        state = (state + GOLDEN_GAMMA) & MASK64
        out.append(splitmix64_mix(state))
    return out


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be nonnegative, got {self.trial_index}")

    @property
    def derived_seed(self) -> int:
        return splitmix64_mix(self.master_seed + self.trial_index * GOLDEN_GAMMA)


class Stream:
    """A single-owner xoshiro256** stream.  Not safe to share between trials."""

    def __init__(self, seed: int):
        words = splitmix64_sequence(seed, 4)
        if not any(words):
            words[0] = 1
        self.seed = seed & MASK64
        self.state = np.array(words, dtype=np.uint64)

    def next_u64(self) -> int:
        return int(kernels.next_u64(self.state))

    def u64(self, count: int) -> np.ndarray:
        return kernels.fill_u64(self.state, count)

    def random(self, count: int) -> np.ndarray:
        """``count`` doubles uniform on [0, 1)."""
        return kernels.fill_unit(self.state, count)

    def __repr__(self):
        return f"Stream(seed={self.seed:#018x})"


def derive_stream(seed_spec: SeedSpec) -> Stream:
    return Stream(seed_spec.derived_seed)
