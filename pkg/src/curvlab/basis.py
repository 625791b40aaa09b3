"""Orthonormal basis of so(n), bracket structure constants, and wedge products.

The bivector space of R^n is identified with the Lie algebra so(n): the unit
bivector e_i ^ e_j (i < j) maps to the rank-two antisymmetric matrix sending
e_i to e_j and e_j to -e_i.  Under the scalar product <A, B> = -tr(AB)/2 this
family is orthonormal, and the bracket constants c_{abg} = <[b_a, b_b], b_g>
take values in {-1, 0, +1}.

Flat indices run lexicographically over pairs (i, j) with i < j, so that
dimension N = n(n-1)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

MIN_DIMENSION = 3


def _pair_list(n: int) -> np.ndarray:
    return np.array([(i, j) for i in range(n) for j in range(i + 1, n)], dtype=np.intp)


@dataclass(frozen=True, eq=False)
class SoBasis:
    """Orthonormal generators of so(n) indexed by bivector pairs.

    Attributes:
        n: dimension of the underlying Euclidean space (>= 3).
        N: number of generators, n(n-1)/2.
        pairs: (N, 2) integer array, pairs[a] = (i, j) with i < j, lexicographic.
        pair_to_flat: (n, n) integer array mapping (i, j) and (j, i) to the flat
            index; -1 on the diagonal.
        generators: (N, n, n) integer array of the antisymmetric matrices.
    """

    n: int
    N: int
    pairs: np.ndarray
    pair_to_flat: np.ndarray
    generators: np.ndarray

    def inner(self, A: np.ndarray, B: np.ndarray) -> float:
        """Scalar product -tr(AB)/2 on so(n)."""
        return -0.5 * float(np.trace(A @ B))

    def so_coords(self, A: np.ndarray) -> np.ndarray:
        """Coordinates of an antisymmetric matrix in the generator basis."""
        return A[self.pairs[:, 1], self.pairs[:, 0]].astype(float)

    def so_matrix(self, coords: np.ndarray) -> np.ndarray:
        """Antisymmetric matrix with the given generator coordinates."""
        return np.einsum("a,aij->ij", np.asarray(coords, dtype=float), self.generators)


def build_basis(n: int) -> SoBasis:
    """Build the orthonormal pair basis of so(n).

    Sign convention: the generator of (i, j), i < j, maps e_i to e_j and
    e_j to -e_i.
    """
    if n < MIN_DIMENSION:
        raise ValueError(f"dimension must be >= {MIN_DIMENSION}, got {n}")
    pairs = _pair_list(n)
    N = len(pairs)
    pair_to_flat = np.full((n, n), -1, dtype=np.intp)
    generators = np.zeros((N, n, n), dtype=np.int64)
    for a, (i, j) in enumerate(pairs):
        pair_to_flat[i, j] = a
        pair_to_flat[j, i] = a
        generators[a, j, i] = 1
        generators[a, i, j] = -1
    return SoBasis(n=int(n), N=int(N), pairs=pairs, pair_to_flat=pair_to_flat,
                   generators=generators)


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Bracket constants of so(n) in a given pair basis.

    Attributes:
        triples: (M, 4) float array of rows (a, b, g, c) with a < b and
            c = <[b_a, b_b], b_g> nonzero.  By total antisymmetry these rows
            determine every ordered triple.
        per_gamma: for each g, the sparse antisymmetric N x N matrix C_g with
            entries (C_g)_{ab} = c_{abg}.
        entry_rows / entry_cols / entry_vals: (N, K) dense views of the
            nonzero pattern of each C_g (K = 2(n-2) entries per generator),
            used by the vectorized sharp-product contraction.
    """

    triples: np.ndarray
    per_gamma: list = field(repr=False)
    entry_rows: np.ndarray = field(repr=False)
    entry_cols: np.ndarray = field(repr=False)
    entry_vals: np.ndarray = field(repr=False)

    def dense_tensor(self) -> np.ndarray:
        """Dense (N, N, N) array c[a, b, g]."""
        N = len(self.per_gamma)
        c = np.zeros((N, N, N))
        for g, C in enumerate(self.per_gamma):
            c[:, :, g] = C.toarray()
        return c


def bracket_constants(basis: SoBasis) -> StructureConstants:
    """Compute the structure constants <[b_a, b_b], b_g> of the basis.

    Brackets are evaluated as exact integer matrix commutators, restricted to
    generator pairs sharing exactly one index (all other brackets vanish).
    """
    n, N = basis.n, basis.N
    pairs = basis.pairs
    gens = basis.generators
    rows_per_g: list[list[tuple[int, int, int]]] = [[] for _ in range(N)]
    triples = []
    for a in range(N):
        ia, ja = pairs[a]
        for b in range(N):
            if a == b:
                continue
            ib, jb = pairs[b]
            if len({int(ia), int(ja)} & {int(ib), int(jb)}) != 1:
                continue
            comm = gens[a] @ gens[b] - gens[b] @ gens[a]
            g = int(basis.pair_to_flat[tuple(sorted(set((int(ia), int(ja), int(ib), int(jb)))
                                                    - ({int(ia), int(ja)} & {int(ib), int(jb)})))])
            ig, jg = pairs[g]
            c = int(comm[jg, ig])
            if c == 0:
                continue
            rows_per_g[g].append((a, b, c))
            if a < b:
                triples.append((a, b, g, c))
    per_gamma = []
    K = 2 * (n - 2)
    entry_rows = np.zeros((N, K), dtype=np.intp)
    entry_cols = np.zeros((N, K), dtype=np.intp)
    entry_vals = np.zeros((N, K))
    for g in range(N):
        ent = sorted(rows_per_g[g])
        assert len(ent) == K
        r = np.array([e[0] for e in ent], dtype=np.intp)
        c = np.array([e[1] for e in ent], dtype=np.intp)
        v = np.array([e[2] for e in ent], dtype=float)
        entry_rows[g], entry_cols[g], entry_vals[g] = r, c, v
        per_gamma.append(sp.csr_array((v, (r, c)), shape=(N, N)))
    return StructureConstants(
        triples=np.array(triples, dtype=float).reshape(-1, 4),
        per_gamma=per_gamma,
        entry_rows=entry_rows,
        entry_cols=entry_cols,
        entry_vals=entry_vals,
    )


def wedge(A: np.ndarray, B: np.ndarray, basis: SoBasis) -> np.ndarray:
    """Matrix of the induced map v ^ w -> (Av ^ Bw + Bv ^ Aw)/2 in the pair basis.

    Symmetric as an operator whenever A and B are symmetric.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != (basis.n, basis.n) or B.shape != (basis.n, basis.n):
        raise ValueError(f"expected {basis.n}x{basis.n} endomorphisms, got {A.shape} and {B.shape}")
    i, j = basis.pairs[:, 0], basis.pairs[:, 1]
    k, l = i[:, None], j[:, None]          # output pair (rows)
    p, q = i[None, :], j[None, :]          # input pair (columns)
    return 0.5 * (A[k, p] * B[l, q] + B[k, p] * A[l, q]
                  - A[l, p] * B[k, q] - B[l, p] * A[k, q])


def induced_rotation(Q: np.ndarray, basis: SoBasis) -> np.ndarray:
    """Action of Q in O(n) on the pair basis: the matrix of v ^ w -> Qv ^ Qw."""
    return wedge(Q, Q, basis)


class Algebra:
    """A basis together with its structure constants and cached index helpers.

    Shared read-only; one instance per dimension is cached by :func:`algebra_for`.
    """

    def __init__(self, basis: SoBasis, constants: StructureConstants | None = None):
        self.basis = basis
        self.constants = bracket_constants(basis) if constants is None else constants
        self.n = basis.n
        self.N = basis.N
        self.identity = np.eye(self.N)
        self._sharp_path = None

    def sharp_path(self, vals, GR, GS):
        """Cached einsum contraction path for the sharp-product gather."""
        if self._sharp_path is None:
            self._sharp_path = np.einsum_path("gt,du,dugt,gtdu->gd", vals, vals, GR, GS,
                                              optimize="greedy")[0]
        return self._sharp_path

    def wedge(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return wedge(A, B, self.basis)


@lru_cache(maxsize=None)
def algebra_for(n: int) -> Algebra:
    return Algebra(build_basis(n))
