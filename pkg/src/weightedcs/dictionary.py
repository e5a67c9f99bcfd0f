"""Dictionaries (finite frames) with atoms of arbitrary nonzero norm.

Atoms are stored as the columns of an ``n x N`` matrix and are never
normalized; the atom norms are cached as ``weights``.  Indices are 0-based
throughout the Python API.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard

from .errors import DimensionMismatch, InvalidDimension, InvalidRange, ZeroNormAtom

#: Atoms with Euclidean norm below this are rejected.
ZERO_NORM_FLOOR = 1e-12

DEFAULT_WEIGHT_RANGE = (0.5, 2.0)


@dataclass(frozen=True)
class Dictionary:
    """A finite collection of atoms ``f_1, ..., f_N`` in ``R^n``.

    Use :func:`new_dictionary` (or :meth:`from_matrix`) to construct one; the
    constructor validates its input and caches the atom norms.

    Attributes
    ----------
    matrix : ndarray, shape (n, N)
        Atoms as columns, read-only.
    weights : ndarray, shape (N,)
        ``weights[i] == ||f_i||_2``.
    """

    matrix: np.ndarray
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float, copy=True)
        if A.ndim != 2:
            raise DimensionMismatch(f"atom matrix must be 2-D, got shape {A.shape}")
        n, N = A.shape
        if n < 1:
            raise InvalidDimension("ambient dimension must be at least 1")
        if N < 2:
            raise InvalidDimension("a dictionary needs at least two atoms")
        if not np.all(np.isfinite(A)):
            raise ValueError("atoms must have finite entries")
        w = np.linalg.norm(A, axis=0)
        bad = np.flatnonzero(w < ZERO_NORM_FLOOR)
        if bad.size:
            raise ZeroNormAtom(f"atoms {bad.tolist()} have norm below {ZERO_NORM_FLOOR:g}")
        A.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_matrix(cls, A) -> "Dictionary":
        return cls(np.asarray(A, dtype=float))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    @property
    def atoms(self) -> list[np.ndarray]:
        return [self.matrix[:, j] for j in range(self.N)]

    def normalized(self) -> np.ndarray:
        """Matrix whose columns are the unit atoms ``f_j / ||f_j||``."""
        return self.matrix / self.weights

    def gram(self) -> np.ndarray:
        return self.matrix.T @ self.matrix

    def rescaled(self, scales) -> "Dictionary":
        """New dictionary with atom ``j`` multiplied by ``scales[j]``."""
        scales = np.asarray(scales, dtype=float)
        if scales.shape != (self.N,):
            raise DimensionMismatch(f"expected {self.N} scales, got shape {scales.shape}")
        return Dictionary(self.matrix * scales)

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes()))

    # JSON I/O.  Weights are never written; they are recomputed on load.

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "N": self.N, "atoms": self.matrix.T.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Dictionary":
        return dictionary_from_obj(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Dictionary":
        with open(path) as fh:
            return cls.from_json(fh.read())


def dictionary_from_obj(obj) -> Dictionary:
    """Build a dictionary from the decoded JSON object ``{"n", "N", "atoms"}``."""
    if not isinstance(obj, dict):
        raise ValueError("dictionary JSON must be an object")
    try:
        n, N, atoms = obj["n"], obj["N"], obj["atoms"]
    except KeyError as exc:
        raise ValueError(f"dictionary JSON is missing field {exc}") from None
    if not (isinstance(n, int) and isinstance(N, int)) or isinstance(n, bool) or isinstance(N, bool):
        raise ValueError('"n" and "N" must be integers')
    if not isinstance(atoms, list) or len(atoms) != N:
        raise DimensionMismatch(f'"atoms" must be a list of N={N} atoms')
    for i, atom in enumerate(atoms):
        if not isinstance(atom, list) or len(atom) != n:
            raise DimensionMismatch(f"atom {i} must be a list of n={n} numbers")
        for x in atom:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ValueError(f"atom {i} has a non-finite or non-numeric entry: {x!r}")
    return new_dictionary(atoms)


def new_dictionary(atoms) -> Dictionary:
    """Build a dictionary from a sequence of equal-length atom vectors.

    Raises
    ------
    DimensionMismatch
        If the atoms do not all have the same length.
    ZeroNormAtom
        If some atom has norm below ``ZERO_NORM_FLOOR``.
    """
    atoms = [np.asarray(a, dtype=float).ravel() for a in atoms]
    if len(atoms) < 2:
        raise InvalidDimension("a dictionary needs at least two atoms")
    lengths = {a.size for a in atoms}
    if len(lengths) != 1:
        raise DimensionMismatch(f"atoms have differing lengths {sorted(lengths)}")
    return Dictionary(np.column_stack(atoms))


def synthesize(D: Dictionary, c) -> np.ndarray:
    """Synthesis operator: ``T c = sum_j c_j f_j``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (D.N,):
        raise DimensionMismatch(f"coefficient vector must have length {D.N}, got shape {c.shape}")
    return D.matrix @ c


def analyze(D: Dictionary, x) -> np.ndarray:
    """Analysis operator: entry ``j`` is ``<x, f_j>``.  Adjoint of :func:`synthesize`."""
    x = np.asarray(x, dtype=float)
    if x.shape != (D.n,):
        raise DimensionMismatch(f"signal must have length {D.n}, got shape {x.shape}")
    return D.matrix.T @ x


def coherence(D: Dictionary) -> float:
    """Largest ``|<f_i, f_j>| / (||f_i|| ||f_j||)`` over pairs ``i != j``."""
    U = D.normalized()
    G = np.abs(U.T @ U)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def welch_lower_bound(n: int, N: int) -> float:
    """Welch lower bound ``sqrt((N - n) / (n (N - 1)))``; 0 when ``N <= n``."""
    if n < 1 or N < 2:
        raise InvalidDimension("need n >= 1 and N >= 2")
    if N <= n:
        return 0.0
    return math.sqrt((N - n) / (n * (N - 1)))


def _scales(N, weight_range, rng):
    lo, hi = weight_range
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise InvalidRange(f"weight range must satisfy 0 < lo <= hi, got {weight_range!r}")
    return rng.uniform(lo, hi, size=N)


def orthonormal_basis(n: int) -> Dictionary:
    """The standard basis of ``R^n`` (requires ``n >= 2``)."""
    return Dictionary(np.eye(n))


def two_ortho_dictionary(n: int, weight_seed=None, weight_range=DEFAULT_WEIGHT_RANGE) -> Dictionary:
    """Union of the identity and the normalized Hadamard basis of ``R^n``.

    The unscaled system has coherence exactly ``1/sqrt(n)``.  With a
    ``weight_seed`` every atom is multiplied by an independent draw from
    ``weight_range``, which leaves the coherence unchanged.
    """
    if n < 1 or n & (n - 1):
        raise InvalidDimension(f"n must be a power of 2, got {n}")
    A = np.hstack([np.eye(n), hadamard(n) / math.sqrt(n)])
    if weight_seed is not None:
        A = A * _scales(2 * n, weight_range, np.random.default_rng(weight_seed))
    return Dictionary(A)


def simplex_dictionary(n: int, weight_seed=None, weight_range=DEFAULT_WEIGHT_RANGE) -> Dictionary:
    """The ``n + 1`` vertices of a regular simplex centred at the origin of ``R^n``.

    The atoms are equiangular with pairwise inner products ``-1/n`` after
    normalization, so the coherence is ``1/n``.
    """
    if n < 1:
        raise InvalidDimension("n must be >= 1")
    E = np.eye(n + 1) - 1.0 / (n + 1)
    # orthonormal basis of the sum-zero hyperplane
    Q = np.linalg.svd(E)[0][:, :n]
    A = Q.T @ E
    A /= np.linalg.norm(A, axis=0)
    if weight_seed is not None:
        A = A * _scales(n + 1, weight_range, np.random.default_rng(weight_seed))
    return Dictionary(A)


def random_dictionary(n: int, N: int, weight_range=DEFAULT_WEIGHT_RANGE, seed=None) -> Dictionary:
    """Gaussian atoms rescaled to norms drawn uniformly from ``weight_range``."""
    if n < 1 or N < 2:
        raise InvalidDimension("need n >= 1 and N >= 2")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, N))
    norms = np.linalg.norm(G, axis=0)
    # a zero Gaussian column has probability zero, but stay total
    while np.any(norms < ZERO_NORM_FLOOR):
        bad = norms < ZERO_NORM_FLOOR
        G[:, bad] = rng.standard_normal((n, int(bad.sum())))
        norms = np.linalg.norm(G, axis=0)
    return Dictionary(G / norms * _scales(N, weight_range, rng))
