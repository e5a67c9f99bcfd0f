"""Weighted coefficient-space norms, supports and best s-term truncation."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, InvalidExponent, InvalidSparsity

#: Support threshold recommended for iterates returned by numerical solvers.
SOLVER_SUPPORT_TOL = 1e-10


def _pair(c, w):
    c = np.asarray(c, dtype=float)
    w = np.asarray(w, dtype=float)
    if c.ndim != 1 or c.shape != w.shape:
        raise DimensionMismatch(f"shapes {c.shape} and {w.shape} do not match")
    return c, w


def weighted_p_norm(c, w, p=2.0) -> float:
    """``(sum_i |c_i|^p w_i^p)^(1/p)`` for ``0 < p < inf``."""
    c, w = _pair(c, w)
    if not p > 0 or not math.isfinite(p):
        raise InvalidExponent(f"p must be a positive finite number, got {p!r}")
    a = np.abs(c * w)
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.linalg.norm(a))
    return float(np.sum(a**p) ** (1.0 / p))


def weighted_l1(c, w) -> float:
    return weighted_p_norm(c, w, 1)


def weighted_l2(c, w) -> float:
    return weighted_p_norm(c, w, 2)


def weighted_inner(c, d, w) -> float:
    """``sum_i c_i d_i w_i^2``."""
    c, w = _pair(c, w)
    d, _ = _pair(d, w)
    return float(np.sum(c * d * w * w))


def support(c, tol=0.0) -> np.ndarray:
    """Sorted indices ``i`` with ``|c_i| > tol``."""
    return np.flatnonzero(np.abs(np.asarray(c, dtype=float)) > tol)


def l0(c, tol=0.0) -> int:
    return int(support(c, tol).size)


def hard_truncate(c, w, s: int):
    """Keep the ``s`` entries of largest weighted magnitude ``w_i |c_i|``.

    Ties go to the lowest index.

    Returns
    -------
    c_s : ndarray
        Copy of ``c`` with every entry outside ``T0`` set to zero.
    T0 : ndarray
        The kept indices, sorted ascending.
    """
    c, w = _pair(c, w)
    if not 0 <= s <= c.size:
        raise InvalidSparsity(f"s must lie in [0, {c.size}], got {s}")
    # stable sort on the negated magnitude keeps lower indices first among ties
    order = np.argsort(-np.abs(c * w), kind="stable")
    T0 = np.sort(order[:s])
    c_s = np.zeros_like(c)
    c_s[T0] = c[T0]
    return c_s, T0


def tail_e0(c, w, s: int) -> float:
    """Normalized weighted tail ``||c - c_s||_{1,w} / sqrt(s)``."""
    c, w = _pair(c, w)
    if not 1 <= s <= c.size:
        raise InvalidSparsity(f"s must lie in [1, {c.size}], got {s}")
    c_s, _ = hard_truncate(c, w, s)
    return weighted_l1(c - c_s, w) / math.sqrt(s)
