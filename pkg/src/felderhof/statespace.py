"""Particle-number sectors of the M-site quantum space.

Basis states are product states of holes |0> and particles |1>.  A sector is
fixed by (M, k) and its basis is the lexicographically ordered list of
k-element position tuples, positions 1-based.  Creation and annihilation
carry no fermionic signs, so every product basis vector has coefficient 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


class SectorMismatchError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Configuration:
    """Occupied sites 1 <= x_1 < ... < x_N <= M."""

    m_sites: int
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        pos = tuple(int(x) for x in self.positions)
        object.__setattr__(self, "positions", pos)
        if self.m_sites < 1:
            raise ValueError("a configuration needs at least one site")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing: {pos}")
        if pos and (pos[0] < 1 or pos[-1] > self.m_sites):
            raise ValueError(f"positions {pos} out of range 1..{self.m_sites}")

    @property
    def n_particles(self) -> int:
        return len(self.positions)

    @property
    def mask(self) -> int:
        """Bit j-1 set when site j is occupied."""
        m = 0
        for x in self.positions:
            m |= 1 << (x - 1)
        return m

    @classmethod
    def from_mask(cls, m_sites: int, mask: int) -> "Configuration":
        return cls(m_sites, tuple(j + 1 for j in range(m_sites) if mask >> j & 1))

    def occupations(self) -> tuple[int, ...]:
        occ = [0] * self.m_sites
        for x in self.positions:
            occ[x - 1] = 1
        return tuple(occ)


class SectorBasis:
    """All C(M, k) configurations of k particles on M sites, in lexicographic order."""

    def __init__(self, m_sites: int, particle_count: int):
        if m_sites < 1 or not (0 <= particle_count <= m_sites):
            raise ValueError(f"no sector with k={particle_count} on M={m_sites} sites")
        self.m_sites = m_sites
        self.particle_count = particle_count
        self.configs = tuple(
            Configuration(m_sites, c) for c in combinations(range(1, m_sites + 1), particle_count)
        )
        self.masks = tuple(c.mask for c in self.configs)
        self._index = {m: i for i, m in enumerate(self.masks)}
        assert len(self.configs) == comb(m_sites, particle_count)

    def __len__(self) -> int:
        return len(self.configs)

    def __repr__(self) -> str:
        return f"SectorBasis(M={self.m_sites}, k={self.particle_count})"

    def index(self, c: Configuration) -> int:
        if c.m_sites != self.m_sites or c.n_particles != self.particle_count:
            raise SectorMismatchError(f"{c} is not in {self!r}")
        return self._index[c.mask]

    def index_of_mask(self, mask: int) -> int:
        return self._index[mask]


@lru_cache(maxsize=None)
def sector_basis(m_sites: int, particle_count: int) -> SectorBasis:
    return SectorBasis(m_sites, particle_count)


@dataclass(frozen=True)
class SectorVector:
    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (len(self.basis),):
            raise ValueError(
                f"expected {len(self.basis)} amplitudes for {self.basis!r}, got shape {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def m_sites(self) -> int:
        return self.basis.m_sites

    @property
    def particle_count(self) -> int:
        return self.basis.particle_count

    def items(self):
        """Yield (mask, amplitude) pairs with nonzero amplitude."""
        for m, a in zip(self.basis.masks, self.amplitudes):
            if a != 0:
                yield m, complex(a)

    def amplitude(self, c: Configuration) -> complex:
        return complex(self.amplitudes[self.basis.index(c)])


def vacuum(m_sites: int) -> SectorVector:
    """All sites empty."""
    if m_sites < 1:
        raise ValueError("vacuum needs M >= 1")
    return SectorVector(sector_basis(m_sites, 0), np.ones(1, dtype=complex))


def configuration_state(c: Configuration) -> SectorVector:
    basis = sector_basis(c.m_sites, c.n_particles)
    amps = np.zeros(len(basis), dtype=complex)
    amps[basis.index(c)] = 1.0
    return SectorVector(basis, amps)


def inner(dual_c: Configuration, v: SectorVector) -> complex:
    """Pair the dual product state <dual_c| with v."""
    if dual_c.m_sites != v.m_sites or dual_c.n_particles != v.particle_count:
        raise SectorMismatchError(
            f"dual state with {dual_c.n_particles} particles on {dual_c.m_sites} sites "
            f"cannot pair with sector k={v.particle_count}, M={v.m_sites}"
        )
    return v.amplitude(dual_c)


def mixed_dual(m_sites: int, n_particles: int, n: int) -> Configuration:
    """Dual state with holes on sites 1..M-N+n and particles on the last N-n sites."""
    if not (0 <= n <= n_particles <= m_sites):
        raise ValueError(f"need 0 <= n <= N <= M, got n={n}, N={n_particles}, M={m_sites}")
    return Configuration(m_sites, tuple(range(m_sites - n_particles + n + 1, m_sites + 1)))


def resolve_identity(v: SectorVector) -> SectorVector:
    """Apply sum_c |c><c| to v; returns an equal vector."""
    out = np.zeros(len(v.basis), dtype=complex)
    for c in v.basis.configs:
        out += inner(c, v) * configuration_state(c).amplitudes
    return SectorVector(v.basis, out)
