"""Permutation actions and statistics projectors on tensor-grid vectors.

Projectors are applied matrix-free by permuting tensor axes; N! stays
enumerable at desk scale (N <= 3), so every projector is an explicit
average over group elements.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "permute",
    "compose",
    "invert",
    "parity",
    "StatisticsProjector",
    "bosonic_projector",
    "fermionic_projector",
    "cluster_projector",
    "factor_projector",
    "project_statistics",
    "normalized_symmetrize",
    "fix_sign",
    "SymmetrizerAnnihilation",
]


class SymmetrizerAnnihilation(ValueError):
    """The symmetrizer annihilated the vector (norm below tolerance)."""


def invert(perm: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def compose(pi: tuple[int, ...], sigma: tuple[int, ...]) -> tuple[int, ...]:
    """Function composition (pi o sigma)(i) = pi(sigma(i))."""
    return tuple(pi[sigma[i]] for i in range(len(pi)))


def parity(perm: tuple[int, ...]) -> int:
    """(-1)^(number of transpositions)."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permute(v: np.ndarray, perm: tuple[int, ...], n_particles: int | None = None) -> np.ndarray:
    """Apply the coordinate permutation action T_perm to a grid vector.

    (T_perm v)(x_1, ..., x_N) = v(x_{perm^-1(1)}, ..., x_{perm^-1(N)});
    supports a single flat vector (dim,) or a batch (b, dim).  Orthogonal:
    the norm is preserved exactly.
    """
    perm = tuple(perm)
    n_p = n_particles if n_particles is not None else len(perm)
    if len(perm) != n_p or sorted(perm) != list(range(n_p)):
        raise ValueError(f"not a permutation of 0..{n_p - 1}: {perm}")
    v = np.asarray(v)
    dim = v.shape[-1]
    n = round(dim ** (1.0 / n_p))
    if n**n_p != dim:
        raise ValueError(f"shape mismatch: {dim} != n^{n_p}")
    batch = v.reshape((-1,) + (n,) * n_p)
    axes = (0,) + tuple(a + 1 for a in invert(perm))
    return np.ascontiguousarray(batch.transpose(axes)).reshape(v.shape)


@dataclass(frozen=True)
class PermutationAction:
    """A single permutation together with its flattened-index action."""

    perm: tuple[int, ...]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return permute(v, self.perm)

    def __matmul__(self, other: "PermutationAction") -> "PermutationAction":
        return PermutationAction(compose(self.perm, other.perm))


@dataclass(frozen=True)
class StatisticsProjector:
    """Orthogonal projector built from a weighted permutation average.

    kind: 'S' (symmetrizer), 'A' (antisymmetrizer), 'cluster' (S_E over the
    permutations preserving an electron partition), or 'cluster_factor'
    (S_{j,b}: symmetrize only one block's coordinates).
    """

    kind: str
    n_particles: int
    terms: tuple[tuple[tuple[int, ...], float], ...]  # (perm, weight) pairs

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = None
        for perm, w in self.terms:
            t = w * permute(v, perm, self.n_particles)
            out = t if out is None else out + t
        return out

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)


def _average(kind: str, n_particles: int, perms, weights) -> StatisticsProjector:
    return StatisticsProjector(
        kind=kind,
        n_particles=n_particles,
        terms=tuple((tuple(p), w) for p, w in zip(perms, weights)),
    )


def bosonic_projector(n_particles: int) -> StatisticsProjector:
    """S = (1/N!) sum over all permutations of T_pi."""
    perms = list(itertools.permutations(range(n_particles)))
    w = 1.0 / math.factorial(n_particles)
    return _average("S", n_particles, perms, [w] * len(perms))


def fermionic_projector(n_particles: int) -> StatisticsProjector:
    """A = (1/N!) sum over permutations of sign(pi) T_pi."""
    perms = list(itertools.permutations(range(n_particles)))
    w = 1.0 / math.factorial(n_particles)
    return _average("A", n_particles, perms, [w * parity(p) for p in perms])


def _block_perms(n_particles: int, blocks) -> list[tuple[int, ...]]:
    """All permutations that move indices only within the given blocks."""
    blocks = [tuple(b) for b in blocks]
    covered = [i for b in blocks for i in b]
    if len(set(covered)) != len(covered):
        raise ValueError("blocks must be disjoint")
    result = []
    per_block = [list(itertools.permutations(b)) for b in blocks]
    for combo in itertools.product(*per_block):
        perm = list(range(n_particles))
        for block, image in zip(blocks, combo):
            for src, dst in zip(block, image):
                perm[src] = dst
        result.append(tuple(perm))
    return result


def cluster_projector(n_particles: int, blocks) -> StatisticsProjector:
    """S_E: average over the permutations that keep each electron block invariant."""
    perms = _block_perms(n_particles, blocks)
    w = 1.0 / len(perms)
    return _average("cluster", n_particles, perms, [w] * len(perms))


def factor_projector(n_particles: int, block) -> StatisticsProjector:
    """S_{j,b}: symmetrizer over only the coordinates of one block."""
    perms = _block_perms(n_particles, [block])
    w = 1.0 / len(perms)
    return _average("cluster_factor", n_particles, perms, [w] * len(perms))


def project_statistics(v: np.ndarray, projector: StatisticsProjector) -> np.ndarray:
    return projector.apply(v)


def normalized_symmetrize(
    v: np.ndarray, n_particles: int | None = None, tol: float = 1e-12
) -> tuple[np.ndarray, float]:
    """Return (S v / ||S v||, ||S v||); raises if the symmetrizer kills v.

    The returned norm is the separation-dependent normalization constant of
    the symmetrized product states; callers record it as a diagnostic.
    """
    n_p = n_particles
    if n_p is None:
        raise ValueError("n_particles required")
    sv = bosonic_projector(n_p).apply(v)
    norm = float(np.linalg.norm(sv))
    if norm <= tol * max(1.0, float(np.linalg.norm(v))):
        raise SymmetrizerAnnihilation(
            f"vector annihilated by symmetrizer (|Sv| = {norm:.3e})"
        )
    return sv / norm, norm


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: the entry sum is nonnegative."""
    s = float(v.sum())
    if s < 0 or (s == 0 and (v[np.argmax(np.abs(v))] if v.size else 0) < 0):
        return -v
    return v
