"""Weighted basis pursuit denoising.

Solves::

    minimize  ||c||_{1,w}   subject to   ||y - T c||_2 <= eta

with a Chambolle-Pock primal-dual iteration.  The weighted l1 term enters
through its proximal map (shrinkage of ``c_i`` by ``tau * w_i``) and the
constraint through projection onto the ball of radius ``eta`` around ``y``.
Periodically the iterate is polished on its support, made exactly feasible
and compared against the dual objective; the run stops once the duality gap
certifies the requested accuracy.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .dictionary import Dictionary, coherence, synthesize
from .errors import DimensionMismatch, NotConvergedWarning, TooLarge
from .guarantees import GuaranteeReport, error_bound
from .weighted_norms import tail_e0, weighted_l1, weighted_l2

logger = logging.getLogger(__name__)

ORACLE_MAX_ATOMS = 12


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration policy for :func:`solve_p1w`.

    Attributes
    ----------
    max_iters : int
        Iteration cap.
    rel_tol : float
        Stop when the duality gap is below ``rel_tol * (1 + objective)``.
    feas_tol : float
        Allowed excess of ``||y - Tc||`` over ``eta``.
    step_ratio : float
        Primal step ``tau = step_ratio / L`` and dual step
        ``sigma = 1 / (step_ratio * L)``, where ``L`` estimates ``||T||``.
    check_every : int
        Iterations between polishing / gap evaluations.
    norm_tol : float
        Relative tolerance of the power iteration for ``||T||``.
    """

    max_iters: int = 50000
    rel_tol: float = 1e-9
    feas_tol: float = 1e-8
    step_ratio: float = 1.0
    check_every: int = 25
    norm_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("max_iters and check_every must be >= 1")
        for name in ("rel_tol", "feas_tol", "step_ratio", "norm_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "SolverConfig":
        obj = json.loads(text)
        if not isinstance(obj, dict):
            raise ValueError("solver config JSON must be an object")
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class SolveInfo:
    converged: bool
    iterations: int
    objective: float
    dual_objective: float
    residual_norm: float
    operator_norm: float


def operator_norm(A, tol=1e-10, max_iter=100000, seed=0) -> float:
    """Spectral norm of ``A`` by power iteration on ``A^T A``."""
    A = np.asarray(A, dtype=float)
    x = np.random.default_rng(seed).standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        v = A.T @ (A @ x)
        lam = float(np.linalg.norm(v))
        if lam == 0.0:
            return 0.0
        x = v / lam
        if abs(lam - est) <= tol * lam:
            est = lam
            break
        est = lam
    return math.sqrt(est)


def soft_threshold(x, thresh):
    """Componentwise shrinkage ``sign(x) max(|x| - thresh, 0)``."""
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def project_ball(u, center, radius):
    d = u - center
    nd = np.linalg.norm(d)
    if nd <= radius:
        return u
    return center + d * (radius / nd)


class _Problem:
    """Feasibility repair and support polishing for one (A, w, y, eta)."""

    def __init__(self, A, w, y, eta, feas_tol):
        self.A, self.w, self.y, self.eta = A, w, y, eta
        self.feas_tol = feas_tol
        self.pinv = np.linalg.pinv(A)

    def objective(self, c):
        return float(np.sum(self.w * np.abs(c)))

    def feasible(self, c):
        return np.linalg.norm(self.y - self.A @ c) <= self.eta + self.feas_tol

    def repair(self, c):
        """Shift ``c`` by a least-norm correction so the residual lands in the ball."""
        r = self.y - self.A @ c
        nr = np.linalg.norm(r)
        if nr <= self.eta:
            return c
        return c + self.pinv @ (r * (1.0 - self.eta / nr))

    def augment(self, S, signs, p):
        """Grow support ``S`` one atom at a time until a polished fit is feasible.

        Each round tries every inactive atom (sign taken from the dual
        correlation) and keeps the cheapest feasible result; if none is
        feasible, the atom leaving the smallest residual joins ``S``.
        """
        corr = -(self.A.T @ p) / self.w
        S, signs = list(S), list(signs)
        while len(S) < self.A.shape[0]:
            best = None
            fallback = None
            for j in range(self.A.shape[1]):
                if j in S:
                    continue
                sgn = np.sign(corr[j]) or 1.0
                trial = np.array(S + [j])
                order = np.argsort(trial)
                out = self.polish(trial[order], np.array(signs + [sgn])[order], p)
                if out is None:
                    continue
                res = np.linalg.norm(self.y - self.A @ out[0])
                if res <= self.eta + self.feas_tol:
                    obj = self.objective(out[0])
                    if best is None or obj < best[0]:
                        best = (obj, out)
                elif fallback is None or res < fallback[0]:
                    fallback = (res, j, sgn)
            if best is not None:
                return best[1]
            if fallback is None:
                return None
            S.append(fallback[1])
            signs.append(fallback[2])
        return None

    def refine(self, S, signs, p, max_rounds=None):
        """Active-set walk from ``(S, signs)`` driven by the polished dual points.

        Each round polishes, drops atoms whose fitted sign disagrees with the
        requested one, or else adds the atom whose dual constraint is most
        violated.  Every polished point along the way is returned.
        """
        n = self.A.shape[0]
        S, signs = list(S), list(signs)
        found = []
        for _ in range(max_rounds or 2 * n):
            if not S:
                break
            order = np.argsort(S)
            S = [S[i] for i in order]
            signs = [signs[i] for i in order]
            out = self.polish(np.array(S), np.array(signs), p)
            if out is None:
                break
            found.append(out)
            c, q = out
            if self.eta == 0.0:
                # the exact fit does not depend on the signs; adopt its own
                signs = [np.sign(c[j]) or g for j, g in zip(S, signs)]
            flipped = [k for k, j in enumerate(S) if c[j] * signs[k] < 0]
            if flipped:
                S = [j for k, j in enumerate(S) if k not in flipped]
                signs = [g for k, g in enumerate(signs) if k not in flipped]
                continue
            viol = np.abs(self.A.T @ q) / self.w
            viol[S] = -np.inf
            j = int(np.argmax(viol))
            if viol[j] <= 1.0 + 1e-12 or len(S) >= n:
                break
            S.append(j)
            signs.append(-np.sign(self.A[:, j] @ q))
        return found

    def polish(self, S, signs, p):
        """Minimizer of the weighted l1 norm on support ``S`` with fixed ``signs``.

        On a fixed sign pattern the objective is linear, so the minimizer
        is the least-squares fit moved along ``G^{-1} g`` until the residual
        norm reaches ``eta``.  Also returns a dual point satisfying the
        stationarity conditions on ``S``: the KKT multiplier of the ball
        when ``eta > 0``, otherwise ``p`` projected onto
        ``{q : A_S^T q = -g}``.
        """
        AS = self.A[:, S]
        if S.size == 0 or S.size > AS.shape[0]:
            return None
        Q, R = np.linalg.qr(AS)
        if np.min(np.abs(np.diag(R))) < 1e-12 * max(1.0, np.abs(R).max()):
            return None
        g = self.w[S] * signs
        h = np.linalg.solve(R, np.linalg.solve(R.T, g))
        c_ls = np.linalg.solve(R, Q.T @ self.y)
        r_ls = self.y - AS @ c_ls
        rr = float(r_ls @ r_ls)
        if self.eta == 0.0:
            cS = c_ls
            # the fit ignores the requested signs, so the dual must use its own
            g = self.w[S] * np.where(c_ls != 0, np.sign(c_ls), signs)
            q = p - AS @ np.linalg.solve(R, np.linalg.solve(R.T, AS.T @ p + g))
        else:
            if rr > self.eta**2:
                return None
            t = math.sqrt((self.eta**2 - rr) / float(g @ h))
            cS = c_ls - t * h
            q = (AS @ cS - self.y) / t
        c = np.zeros(self.A.shape[1])
        c[S] = cS
        return c, q


def _dual_value(A, w, y, eta, p):
    """Dual objective at ``p`` rescaled into ``{|A^T p|_i <= w_i}``."""
    g = float(np.max(np.abs(A.T @ p) / w))
    if g > 1.0:
        p = p / g
    return float(-(p @ y) - eta * np.linalg.norm(p))


def solve_p1w(D: Dictionary, y, eta=0.0, cfg: SolverConfig | None = None, full_output=False):
    """Minimize ``||c||_{1,w}`` subject to ``||y - T c||_2 <= eta``.

    Parameters
    ----------
    D : Dictionary
        Should span ``R^n`` so that every ``eta >= 0`` is feasible.
    y : array_like, shape (n,)
    eta : float
        Radius of the data-fidelity ball.
    cfg : SolverConfig, optional
    full_output : bool
        Also return a :class:`SolveInfo`.

    Returns
    -------
    c : ndarray, shape (N,)
        Best feasible iterate.  If the iteration cap is hit before the
        duality gap closes, a :class:`NotConvergedWarning` is emitted and
        ``info.converged`` is False.
    """
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=float)
    if y.shape != (D.n,):
        raise DimensionMismatch(f"y must have length {D.n}, got shape {y.shape}")
    if not eta >= 0:
        raise ValueError("eta must be >= 0")
    A, w = D.matrix, D.weights
    ynorm = float(np.linalg.norm(y))
    if ynorm <= eta:
        c = np.zeros(D.N)
        info = SolveInfo(True, 0, 0.0, 0.0, ynorm, float("nan"))
        return (c, info) if full_output else c

    # the problem is positively homogeneous in (y, eta): solve at unit scale
    yh, etah = y / ynorm, eta / ynorm
    prob = _Problem(A, w, yh, etah, cfg.feas_tol / ynorm)
    L = operator_norm(A, tol=cfg.norm_tol)
    L *= 1.0 + 1e-8
    tau = cfg.step_ratio / L
    sigma = 1.0 / (cfg.step_ratio * L)

    c = np.zeros(D.N)
    c_bar = c.copy()
    p = np.zeros(D.n)
    best, best_obj = None, math.inf
    dual = -math.inf
    it = 0
    converged = False
    checks = 0
    for it in range(1, cfg.max_iters + 1):
        q = p + sigma * (A @ c_bar)
        p = q - sigma * project_ball(q / sigma, yh, etah)
        c_old = c
        c = soft_threshold(c - tau * (A.T @ p), tau * w)
        c_bar = 2.0 * c - c_old

        if it % cfg.check_every and it != cfg.max_iters:
            continue
        dual = max(dual, _dual_value(A, w, yh, etah, p))
        checks += 1
        for cand in _candidates(prob, c, p, augment=checks % 10 == 0):
            if cand is None:
                continue
            cand, q = cand
            if q is not None:
                dual = max(dual, _dual_value(A, w, yh, etah, q))
            if not prob.feasible(cand):
                continue
            obj = prob.objective(cand)
            if obj < best_obj:
                best, best_obj = cand, obj
        if best is not None and best_obj - dual <= cfg.rel_tol * (1.0 + best_obj):
            converged = True
            break

    if best is None:
        best = prob.repair(c)
        best_obj = prob.objective(best)
    if not converged:
        warnings.warn(
            f"solve_p1w stopped after {it} iterations with duality gap {best_obj - dual:.3g}",
            NotConvergedWarning,
            stacklevel=2,
        )
    c_out = best * ynorm
    if not full_output:
        return c_out
    info = SolveInfo(
        converged=converged,
        iterations=it,
        objective=weighted_l1(c_out, w),
        dual_objective=dual * ynorm,
        residual_norm=float(np.linalg.norm(y - A @ c_out)),
        operator_norm=L,
    )
    return c_out, info


def _candidates(prob, c, p, augment=False):
    """Feasible points worth comparing: the repaired iterate and polished supports.

    Supports come from thresholding the weighted magnitudes of ``c`` and
    from the near-active constraints ``|A^T p|_i ~ w_i`` of the dual.
    """
    yield prob.repair(c), None
    mag = np.abs(c) * prob.w
    top = mag.max()
    seen = set()
    supports = []
    if top > 0.0:
        for rel in (1e-3, 1e-6, 1e-9):
            S = np.flatnonzero(mag > rel * top)
            supports.append((S, np.sign(c[S])))
    corr = -(prob.A.T @ p) / prob.w
    # near-active dual constraints: cut the ordering of 1 - |corr| at sharp jumps
    order = np.argsort(1.0 - np.abs(corr), kind="stable")
    gaps = np.maximum(1.0 - np.abs(corr[order]), 1e-16)
    kmax = min(prob.A.shape[0], order.size)
    sizes = {kmax} | {k for k in range(1, kmax) if gaps[k] > 10.0 * gaps[k - 1]}
    for k in sorted(sizes):
        S = np.sort(order[:k])
        supports.append((S, np.sign(corr[S])))
    for S, signs in supports:
        key = S.tobytes() + signs.tobytes()
        if key in seen:
            continue
        seen.add(key)
        yield prob.polish(S, signs, p)
    if top > 0.0:
        for rel in (1e-3, 1e-6):
            S = np.flatnonzero(mag > rel * top)
            yield from prob.refine(S, np.sign(c[S]), p)
    if augment and top > 0.0:
        S = np.flatnonzero(mag > 1e-6 * top)
        if S.size < prob.A.shape[0]:
            yield prob.augment(S, np.sign(c[S]), p)


def oracle_p1w(D: Dictionary, y, eta=0.0, max_atoms=ORACLE_MAX_ATOMS, fit_tol=1e-10) -> np.ndarray:
    """Exact minimizer for ``eta = 0`` by enumerating linearly independent supports.

    The minimum of this linear program is attained at a vertex, which is
    supported on linearly independent atoms, so it is enough to compare
    every exact fit on such a support.
    """
    if eta != 0:
        raise ValueError("the enumeration oracle only handles eta = 0")
    if D.N > max_atoms:
        raise TooLarge(f"N = {D.N} exceeds the oracle limit {max_atoms}")
    y = np.asarray(y, dtype=float)
    if y.shape != (D.n,):
        raise DimensionMismatch(f"y must have length {D.n}, got shape {y.shape}")
    best, best_obj = np.zeros(D.N), math.inf
    if not np.any(y):
        return best
    A, w = D.matrix, D.weights
    scale = max(1.0, float(np.linalg.norm(y)))
    for k in range(1, min(D.n, D.N) + 1):
        for S in itertools.combinations(range(D.N), k):
            AS = A[:, S]
            sv = np.linalg.svd(AS / w[list(S)], compute_uv=False)
            if sv[-1] < 1e-10:
                continue
            cS = np.linalg.lstsq(AS, y, rcond=None)[0]
            if np.linalg.norm(AS @ cS - y) > fit_tol * scale:
                continue
            obj = float(np.sum(w[list(S)] * np.abs(cS)))
            if obj < best_obj:
                best = np.zeros(D.N)
                best[list(S)] = cS
                best_obj = obj
    if math.isinf(best_obj):
        raise ValueError("y is not in the span of the dictionary")
    return best


def random_noise(n, eps, rng) -> np.ndarray:
    """Vector of norm exactly ``eps`` in a uniformly random direction."""
    z = rng.standard_normal(n)
    while not np.any(z):
        z = rng.standard_normal(n)
    return z * (eps / np.linalg.norm(z))


def verify_recovery(D: Dictionary, c_true, s, eps, eta, cfg=None, rng=None, mu=None) -> GuaranteeReport:
    """Run one noisy recovery and compare the observed error with the bound.

    Draws noise ``z`` with ``||z|| = eps``, solves from ``y = T c_true + z``
    and reports ``||c* - c_true||_{2,w}`` against ``C1 (eta + eps) + C2 e0``.
    ``extra`` records solver convergence and the check
    ``||c*||_{1,w} <= ||c_true||_{1,w}`` (``c_true`` is feasible because
    ``eps <= eta``).
    """
    if not 0 <= eps <= eta:
        raise ValueError("need 0 <= eps <= eta")
    rng = np.random.default_rng(rng)
    c_true = np.asarray(c_true, dtype=float)
    w = D.weights
    if mu is None:
        mu = coherence(D)
    y = synthesize(D, c_true) + random_noise(D.n, eps, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        c_star, info = solve_p1w(D, y, eta, cfg, full_output=True)
    e0 = tail_e0(c_true, w, s)
    rep = error_bound(mu, s, eta, eps, e0)
    rep.observed = weighted_l2(c_star - c_true, w)
    if rep.applicable:
        rep.satisfied = rep.observed <= rep.bound_value + 1e-6
    l1_true, l1_star = weighted_l1(c_true, w), weighted_l1(c_star, w)
    rep.extra = {
        "converged": info.converged,
        "iterations": info.iterations,
        "residual_norm": info.residual_norm,
        "l1_true": l1_true,
        "l1_solution": l1_star,
        "hypothesis_ok": l1_star <= l1_true + 1e-6 * (1.0 + l1_true),
    }
    if not info.converged:
        logger.warning("solver did not converge in verify_recovery (%d iterations)", info.iterations)
    return rep
