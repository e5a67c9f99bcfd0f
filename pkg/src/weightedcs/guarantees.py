"""Coherence-based recovery guarantees for dictionaries with non-unit atoms.

Every inequality here is evaluated numerically, so the guarantees can be
checked against measured quantities.  Conditions that fail (for instance
``mu * (2s - 1) >= 1``) are reported as data by :func:`error_bound`; the
lower-level constant functions raise :class:`NotApplicable` instead.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dictionary import Dictionary, coherence, synthesize
from .errors import DimensionMismatch, InvalidCoherence, InvalidSparsity, NotApplicable, TooLarge
from .weighted_norms import l0, support, weighted_l1, weighted_l2

ENUMERATION_CAP = 10**6
MU_SLACK = 1e-10
LEMMA_RTOL = 1e-9


@dataclass(frozen=True)
class Bound:
    """A measured ``value`` together with the interval a result claims for it."""

    value: float
    lower: float | None = None
    upper: float | None = None
    scale: float = 1.0
    vacuous: bool = False

    @property
    def slack(self) -> float:
        """Signed distance to the nearest violated side (negative = violated)."""
        if self.vacuous:
            return math.inf
        gaps = []
        if self.lower is not None:
            gaps.append(self.value - self.lower)
        if self.upper is not None:
            gaps.append(self.upper - self.value)
        return min(gaps)

    def holds(self, rtol=LEMMA_RTOL) -> bool:
        return self.slack >= -rtol * max(self.scale, 1.0)


@dataclass(frozen=True)
class LemmaCheck:
    mu: float
    disjoint: Bound
    quadratic: Bound
    sparse: Bound

    def holds(self, rtol=LEMMA_RTOL) -> bool:
        return all(b.holds(rtol) for b in (self.disjoint, self.quadratic, self.sparse))


def basic_lemma_check(D: Dictionary, c, d=None, mu=None) -> LemmaCheck:
    """Evaluate the three parts of the basic coherence lemma on ``c`` (and ``d``).

    * ``disjoint``: ``|<Tc, Td>| <= mu ||c||_{1,w} ||d||_{1,w}``; vacuous
      unless ``c`` and ``d`` have disjoint supports.
    * ``quadratic``: ``(1+mu)||c||_{2,w}^2 - mu||c||_{1,w}^2 <= ||Tc||^2
      <= (1-mu)||c||_{2,w}^2 + mu||c||_{1,w}^2``.
    * ``sparse``: ``[1 - mu(s-1)] ||c||_{2,w}^2 <= ||Tc||^2 <= [1 + mu(s-1)]
      ||c||_{2,w}^2`` with ``s = l0(c)``.

    ``mu`` may be passed to avoid recomputing the coherence.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (D.N,):
        raise DimensionMismatch(f"c must have length {D.N}")
    if mu is None:
        mu = coherence(D)
    w = D.weights
    Tc = synthesize(D, c)
    n2 = weighted_l2(c, w) ** 2
    n1 = weighted_l1(c, w)
    tc2 = float(Tc @ Tc)

    if d is None:
        disjoint = Bound(0.0, upper=0.0, vacuous=True)
    else:
        d = np.asarray(d, dtype=float)
        if d.shape != (D.N,):
            raise DimensionMismatch(f"d must have length {D.N}")
        n1d = weighted_l1(d, w)
        rhs = mu * n1 * n1d
        is_disjoint = np.intersect1d(support(c), support(d)).size == 0
        disjoint = Bound(
            abs(float(Tc @ synthesize(D, d))), upper=rhs, scale=n1 * n1d, vacuous=not is_disjoint
        )

    quadratic = Bound(
        tc2,
        lower=(1 + mu) * n2 - mu * n1 * n1,
        upper=(1 - mu) * n2 + mu * n1 * n1,
        scale=n1 * n1,
    )
    s = l0(c)
    k = mu * max(s - 1, 0)
    sparse = Bound(tc2, lower=(1 - k) * n2, upper=(1 + k) * n2, scale=max(n2, tc2))
    return LemmaCheck(mu, disjoint, quadratic, sparse)


def _check_mu(mu):
    if not (0 < mu <= 1 + MU_SLACK):
        raise InvalidCoherence(f"coherence must lie in (0, 1], got {mu!r}")


def _largest_int_below(x: float) -> int:
    return math.ceil(x) - 1


def uniqueness_max_sparsity(mu: float) -> int:
    """Largest ``s`` with ``s < (1/mu + 1)/2``; such s-sparse representations are unique."""
    _check_mu(mu)
    return max(_largest_int_below((1.0 / mu + 1.0) / 2.0), 0)


def independence_max_size(mu: float) -> int:
    """Largest ``s`` with ``s < 1 + 1/mu``; any ``s`` atoms are then linearly independent."""
    _check_mu(mu)
    return _largest_int_below(1.0 + 1.0 / mu)


def _subsets(N, k, cap):
    total = math.comb(N, k)
    if total > cap:
        raise TooLarge(f"C({N}, {k}) = {total} exceeds the enumeration cap {cap}")
    return np.array(list(itertools.combinations(range(N), k)), dtype=int).reshape(total, k)


def subset_min_singular_value(D: Dictionary, k: int, cap=ENUMERATION_CAP) -> float:
    """Smallest singular value over all ``k``-atom submatrices of the unit-atom matrix.

    Positive (beyond round-off) iff every set of ``k`` atoms is linearly
    independent.
    """
    if not 1 <= k <= D.N:
        raise InvalidSparsity(f"k must lie in [1, {D.N}]")
    if k > D.n:
        return 0.0
    U = D.normalized()
    S = _subsets(D.N, k, cap)
    sv = np.linalg.svd(U[:, S].transpose(1, 0, 2), compute_uv=False)
    return float(sv[:, -1].min())


def sparse_representations_unique(D: Dictionary, s: int, tol=1e-8, cap=ENUMERATION_CAP) -> bool:
    """True when ``Tc = Td`` with ``c, d`` both s-sparse forces ``c = d``.

    Equivalent to every union of two s-supports, i.e. every set of
    ``min(2s, N)`` atoms, being linearly independent.
    """
    return subset_min_singular_value(D, min(2 * s, D.N), cap) > tol


def delta_s_bound(mu: float, s: int) -> float:
    """Coherence bound ``mu (s - 1)`` on the restricted isometry constant."""
    if s < 1:
        raise InvalidSparsity(f"s must be >= 1, got {s}")
    return mu * (s - 1)


def delta_s_exact(D: Dictionary, s: int, cap=ENUMERATION_CAP) -> float:
    """Exact ``sup |(||Tc||^2 - ||c||_{2,w}^2)| / ||c||_{2,w}^2`` over s-sparse ``c``.

    Substituting ``u_i = w_i c_i`` turns the supremum into the largest
    ``||G_S - I||_2`` over supports ``S`` of size ``s``, where ``G_S`` is
    the Gram matrix of the unit atoms on ``S``.  All ``C(N, s)`` supports
    are enumerated.
    """
    if not 1 <= s <= D.N:
        raise InvalidSparsity(f"s must lie in [1, {D.N}], got {s}")
    S = _subsets(D.N, s, cap)
    U = D.normalized()
    G = U.T @ U
    sub = G[S[:, :, None], S[:, None, :]] - np.eye(s)
    ev = np.linalg.eigvalsh(sub)
    return float(np.abs(ev).max())


def _applicable(mu, s):
    return mu * (2 * s - 1) < 1


def recovery_constants(mu: float, s: int) -> tuple[float, float]:
    """Signal-error and tail constants ``(C1, C2)`` of the weighted error bound.

    ``C1 = sqrt(3 - 1/(2s-1)) / (1 - mu(2s-1))`` and
    ``C2 = 2 sqrt(mu s (1+mu)) / (1 - mu(2s-1))``.
    """
    if s < 1:
        raise InvalidSparsity(f"s must be >= 1, got {s}")
    if mu < 0:
        raise InvalidCoherence(f"coherence must be >= 0, got {mu!r}")
    if not _applicable(mu, s):
        raise NotApplicable(f"mu (2s-1) = {mu * (2 * s - 1):g} >= 1")
    k = 2 * s - 1
    denom = 1 - mu * k
    return math.sqrt(3 - 1 / k) / denom, 2 * math.sqrt(mu * s * (1 + mu)) / denom


def cai_constant(mu: float, s: int) -> float:
    """Earlier unit-norm constant ``sqrt(3(1+mu)) / (1 - (2s-1)mu)``, for comparison."""
    if s < 1:
        raise InvalidSparsity(f"s must be >= 1, got {s}")
    if not _applicable(mu, s):
        raise NotApplicable(f"mu (2s-1) = {mu * (2 * s - 1):g} >= 1")
    return math.sqrt(3 * (1 + mu)) / (1 - (2 * s - 1) * mu)


def f_mu(mu, s: int):
    """``((8s^2 - 8s + 1) mu^2 + 2 mu + 1) / (1 + mu)``; vectorized over ``mu``."""
    a = 8 * s * s - 8 * s + 1
    mu = np.asarray(mu, dtype=float)
    out = (a * mu * mu + 2 * mu + 1) / (1 + mu)
    return float(out) if out.ndim == 0 else out


def f_mu_endpoint(s: int) -> float:
    """Closed form of ``f_mu(1/(2s-1), s)``, namely ``(6s - 4)/(2s - 1)``."""
    return (6 * s - 4) / (2 * s - 1)


@dataclass
class GuaranteeReport:
    mu: float
    s: int
    applicable: bool
    eta: float = 0.0
    eps: float = 0.0
    e0: float = 0.0
    C1: float | None = None
    C2: float | None = None
    cai_C: float | None = None
    bound_value: float | None = None
    cai_bound: float | None = None
    observed: float | None = None
    satisfied: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None and k != "extra"}
        out.update(self.extra)
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def error_bound(mu, s, eta, eps, e0) -> GuaranteeReport:
    """Evaluate ``C1 (eta + eps) + C2 e0`` and the matching earlier-constant bound."""
    if min(eta, eps, e0) < 0:
        raise ValueError("eta, eps and e0 must be nonnegative")
    rep = GuaranteeReport(mu=float(mu), s=int(s), applicable=_applicable(mu, s),
                          eta=float(eta), eps=float(eps), e0=float(e0))
    if rep.applicable:
        rep.C1, rep.C2 = recovery_constants(mu, s)
        rep.cai_C = cai_constant(mu, s)
        rep.bound_value = rep.C1 * (eta + eps) + rep.C2 * e0
        rep.cai_bound = rep.cai_C * (eta + eps) + rep.C2 * e0
    return rep
