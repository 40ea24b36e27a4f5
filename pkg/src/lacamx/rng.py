"""Deterministic random stream shared by the Python and compiled kernels.

Every source of randomness in the solver flows through :class:`Rng`, a
splitmix64 stream.  The compiled kernel (``_kernels.pyx``) carries a
bit-identical C implementation, which is what makes the two backends
interchangeable: a search seeded with the same value produces the same
solution no matter which kernel is active, and Monte-Carlo sampling returns
the same configuration whether its samples ran sequentially or on a worker
pool.

Bounded draws use plain modulo.  The bias is irrelevant here (the stream only
breaks ties and picks subsets), and modulo is the one reduction that is
trivially identical across both implementations.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Derive an independent sub-stream seed (e.g. one per Monte-Carlo sample)."""
    return _mix64((master + _GAMMA * (index + 1)) & _MASK64)


class Rng:
    """splitmix64 generator; mirrored in C inside the compiled kernel."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        return _mix64(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, bound: int) -> int:
        """Uniform int in [0, bound); bound must be positive."""
        return self.next_u64() % bound

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle of a mutable sequence."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, population: int, k: int) -> list[int]:
        """k distinct indices drawn from range(population), in draw order."""
        pool = list(range(population))
        for i in range(k):
            j = i + self.next_u64() % (population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
