"""k-body Ising cost Hamiltonians plus a transverse-field driver on 2^N basis states.

Basis convention: computational basis state z is a bit mask, bit i = spin i,
bit value 0 -> sigma^z eigenvalue +1, bit value 1 -> -1. The all-zeros state is
therefore the ground state of a pure -sum(sigma^z) field. The cost energy of z is

    E(z) = -sum_terms J * prod_{i in support} s_i(z),   s_i(z) in {+1, -1}.

The driver -Gamma * sum_i sigma_i^x acts as a bit flip on each site, so the full
Hamiltonian is applied matrix-free in O(N 2^N) without storing any matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SizeCapError, ValidationError

# Diagonal construction cap; spectra and dynamics are capped lower (see spectrum).
MAX_SPINS_DIAGONAL = 20

# Cached (N, 2^N) bit-flip index tables for the vectorized driver apply.
_FLIP_TABLE_CAP = 14
_flip_tables: dict[int, np.ndarray] = {}

# A state vector is a length-2^N complex (or real) ndarray; operations in this
# package keep it unit-norm within the caller's tolerance.
StateVector = np.ndarray


@dataclass(frozen=True)
class IsingProblem:
    """Coupling table {J_i, J_ij, J_ijk, ...} over n_spins sites.

    terms: sequence of (support, coefficient); each support is a strictly
    increasing tuple of distinct site indices in [0, n_spins).
    """

    n_spins: int
    terms: tuple[tuple[tuple[int, ...], float], ...]
    total_j: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValidationError(f"n_spins must be >= 1, got {self.n_spins}")
        norm_terms = []
        for support, coeff in self.terms:
            sites = tuple(int(i) for i in support)
            if len(set(sites)) != len(sites):
                raise ValidationError(f"duplicate site index in support {sites}")
            if any(i < 0 or i >= self.n_spins for i in sites):
                raise ValidationError(
                    f"site index out of range in support {sites} (n_spins={self.n_spins})"
                )
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValidationError(f"non-finite coefficient for support {sites}")
            norm_terms.append((tuple(sorted(sites)), coeff))
        object.__setattr__(self, "terms", tuple(norm_terms))
        object.__setattr__(self, "total_j", float(sum(abs(j) for _, j in self.terms)))

    def to_json(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "terms": [{"sites": list(s), "j": j} for s, j in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "IsingProblem":
        try:
            n = int(data["n_spins"])
            raw = data["terms"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed problem JSON: {exc}") from exc
        terms = []
        for entry in raw:
            try:
                sites = [int(i) for i in entry["sites"]]
                coeff = float(entry["j"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"malformed term entry {entry!r}: {exc}") from exc
            if any(b <= a for a, b in zip(sites, sites[1:])):
                raise ValidationError(
                    f"site list {sites} is not strictly increasing"
                )
            terms.append((tuple(sites), coeff))
        return cls(n_spins=n, terms=tuple(terms))


@dataclass(frozen=True, eq=False)
class DiagonalIsing:
    """Full diagonal of the cost Hamiltonian: energies[z] = <z|H_cost|z>."""

    n_spins: int
    energies: np.ndarray


def build_diagonal(problem: IsingProblem, max_spins: int = MAX_SPINS_DIAGONAL) -> DiagonalIsing:
    """Evaluate the cost energy on every basis state.

    Deterministic; O(#terms * 2^N). Raises SizeCapError beyond max_spins.
    """
    n = problem.n_spins
    if n > max_spins:
        raise SizeCapError(f"n_spins={n} exceeds diagonal cap {max_spins}")
    dim = 1 << n
    z = np.arange(dim, dtype=np.int64)
    energies = np.zeros(dim)
    for sites, coeff in problem.terms:
        signs = np.ones(dim)
        for i in sites:
            signs *= 1.0 - 2.0 * ((z >> i) & 1)
        energies -= coeff * signs
    energies.flags.writeable = False
    return DiagonalIsing(n_spins=n, energies=energies)


def _flip_table(n: int) -> np.ndarray:
    table = _flip_tables.get(n)
    if table is None:
        z = np.arange(1 << n, dtype=np.intp)
        table = np.stack([z ^ (1 << i) for i in range(n)])
        table.flags.writeable = False
        _flip_tables[n] = table
    return table


def apply_hamiltonian(diag: DiagonalIsing, gamma: float, psi: StateVector) -> StateVector:
    """Return H psi with H = H_cost - gamma * sum_i sigma_i^x, matrix-free."""
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma < 0:
        raise ValidationError(f"gamma must be finite and >= 0, got {gamma}")
    if psi.shape != diag.energies.shape:
        raise ValidationError(
            f"state dimension {psi.shape} does not match 2^{diag.n_spins}"
        )
    out = diag.energies * psi
    if gamma != 0.0:
        n = diag.n_spins
        if n <= _FLIP_TABLE_CAP:
            out -= gamma * psi[_flip_table(n)].sum(axis=0)
        else:
            z = np.arange(psi.size, dtype=np.intp)
            for i in range(n):
                out -= gamma * psi[z ^ (1 << i)]
    return out


def transverse_norm(n_spins: int) -> float:
    """Operator norm of sum_i sigma_i^x, which is exactly N."""
    if n_spins < 1:
        raise ValidationError(f"n_spins must be >= 1, got {n_spins}")
    return float(n_spins)
