"""Orthogonal matching pursuit with normalized-correlation selection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary, analyze
from .errors import DimensionMismatch, RankDeficientActiveSet, ZeroResidual

#: Smallest acceptable ``|R_kk|`` of the QR factor of the unit-atom active set.
RANK_TOL = 1e-10


def normalized_correlations(D: Dictionary, r) -> np.ndarray:
    """``|<r, f_j>| / ||f_j||`` for every atom."""
    return np.abs(analyze(D, r)) / D.weights


def select_index(D: Dictionary, r) -> int:
    """Index of the atom whose unit direction is most correlated with ``r``.

    Ties resolve to the lowest index.  Rescaling an atom never changes the
    result.
    """
    r = np.asarray(r, dtype=float)
    if not np.any(r):
        raise ZeroResidual("cannot select an atom for a zero residual")
    return int(np.argmax(normalized_correlations(D, r)))


@dataclass
class OmpTrace:
    """Result of :func:`omp_recover`.  ``selected`` holds 0-based indices."""

    selected: list[int]
    residual_norms: list[float]
    coefficients: np.ndarray
    residual: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        # JSON indices are 1-based to match the f_1 ... f_N labelling
        return {
            "selected": [j + 1 for j in self.selected],
            "residual_norms": [float(x) for x in self.residual_norms],
            "coefficients": self.coefficients.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def omp_recover(D: Dictionary, y, max_atoms=None, residual_tol=None) -> OmpTrace:
    """Greedy sparse approximation of ``y`` by orthogonal matching pursuit.

    Each iteration adds the atom chosen by :func:`select_index` on the
    current residual (restricted to inactive atoms), refits all active
    coefficients by least squares through a fresh QR factorization and
    updates the residual.

    Parameters
    ----------
    max_atoms : int, optional
        Stop once this many atoms are active.  Never more than ``min(n, N)``.
    residual_tol : float, optional
        Stop once the residual norm is ``<= residual_tol``.  Defaults to
        ``1e-10 * ||y||``.

    Raises
    ------
    RankDeficientActiveSet
        If the newly selected atom is numerically dependent on the active ones.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (D.n,):
        raise DimensionMismatch(f"y must have length {D.n}, got shape {y.shape}")
    ynorm = float(np.linalg.norm(y))
    if max_atoms is None:
        max_atoms = min(D.n, D.N)
    if max_atoms < 1:
        raise ValueError("max_atoms must be >= 1")
    if residual_tol is None:
        residual_tol = 1e-10 * ynorm
    if residual_tol < 0:
        raise ValueError("residual_tol must be >= 0")

    U = D.normalized()
    c = np.zeros(D.N)
    r = y.copy()
    active: list[int] = []
    norms: list[float] = []
    rnorm = ynorm
    limit = min(max_atoms, D.n, D.N)
    while len(active) < limit and rnorm > residual_tol:
        corr = normalized_correlations(D, r)
        corr[active] = -np.inf
        j = int(np.argmax(corr))
        active.append(j)
        Q, R = np.linalg.qr(U[:, active])
        if abs(R[-1, -1]) < RANK_TOL:
            raise RankDeficientActiveSet(f"atom {j} is dependent on the active set", active)
        u = np.linalg.solve(R, Q.T @ y)
        c[:] = 0.0
        c[active] = u / D.weights[active]
        r = y - D.matrix @ c
        rnorm = float(np.linalg.norm(r))
        norms.append(rnorm)
    return OmpTrace(active, norms, c, r)
