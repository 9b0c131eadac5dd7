"""Reference values and brute-force checks.

Nothing here calls the engine paths it is meant to check: gauges are
recomputed from textbook formulas (order statistics, minimisation over
candidate levels, root finding), support functions are evaluated directly
on vertex and ray lists, and membership is tested constraint by
constraint.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NotPositiveDefiniteError, SizeLimitError, UnsupportedGauge

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# rational approximation of the normal quantile (P. J. Acklam)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / SQRT2)


def normal_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_quantile(u: float) -> float:
    """Standard normal quantile; rational start plus one Halley step."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"normal quantile needs u in (0, 1), got {u!r}")
    if u < _P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        x = ((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif u <= 1.0 - _P_LOW:
        q = u - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-u))
        x = -((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # Halley refinement against the erfc-based cdf
    e = normal_cdf(x) - u
    g = e / normal_pdf(x)
    return x - g / (1.0 + 0.5 * x * g)


def _normal_positive_moment(p: float) -> float:
    """``E (Z_+)^p`` for a standard normal ``Z``."""
    return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / (2.0 * math.sqrt(math.pi))


def normal_gauge_constants(gauge) -> float:
    """Exact gauge of a standard normal variable."""
    k, p = gauge.kind, gauge.params
    if k == "mean":
        return 0.0
    if k in ("quantile", "quantile-upper"):
        return normal_quantile(p[0])
    if k == "avgq-right":
        a = p[0]
        return 0.0 if a == 0.0 else normal_pdf(normal_quantile(a)) / (1.0 - a)
    if k == "avgq-left":
        a = p[0]
        return 0.0 if a == 1.0 else -normal_pdf(normal_quantile(a)) / a
    if k == "norm":
        return p[1] * _normal_positive_moment(p[0]) ** (1.0 / p[0])
    if k == "expectile":
        tau = p[0]
        if tau == 0.5:
            return 0.0

        def resid(z):
            up = normal_pdf(z) - z * (1.0 - normal_cdf(z))   # E (Z - z)_+
            down = normal_pdf(z) + z * normal_cdf(z)          # E (z - Z)_+
            return tau * up - (1.0 - tau) * down

        return brentq(resid, -40.0, 40.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    raise UnsupportedGauge(f"no closed-form normal constant for {gauge}")


def mc_gaussian(mu, sigma, n: int, seed: int) -> np.ndarray:
    """``n`` reproducible draws from ``N(mu, sigma)``."""
    mu = np.asarray(mu, dtype=float)
    S = np.asarray(sigma, dtype=float)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("covariance matrix is not positive definite") from None
    rng = np.random.Generator(np.random.Philox(seed))
    Z = rng.standard_normal((int(n), mu.size))
    return mu + Z @ L.T


# ---------------------------------------------------------------------------
# scalar gauges from first principles


def _clean(values, weights):
    v = np.asarray(values, dtype=float).ravel()
    w = np.full(v.size, 1.0 / v.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    keep = w > 0
    return v[keep], w[keep] / w[keep].sum()


def oracle_quantile_expanded(values, counts, alpha: float) -> float:
    """Lower quantile of the sample with ``counts[i]`` copies of ``values[i]``.

    The sample is written out in full and the ``ceil(alpha N)``-th order
    statistic returned.
    """
    full = sorted(itertools.chain.from_iterable([v] * int(c) for v, c in zip(values, counts)))
    N = len(full)
    k = max(1, math.ceil(alpha * N - 1e-9))
    return full[k - 1]


def oracle_quantile(values, weights, alpha: float, upper: bool = False) -> float:
    """``min{x : F(x) >= alpha}`` (or ``> alpha`` for the upper version)."""
    v, w = _clean(values, weights)
    for x in sorted(set(v.tolist())):
        F = math.fsum(w[v <= x])
        if (F > alpha + 1e-12) if upper else (F >= alpha - 1e-12):
            return x
    return float(v.max())


def oracle_avgq_right(values, weights, alpha: float) -> float:
    """``min_z z + E(X - z)_+ / (1 - alpha)`` over the support points."""
    v, w = _clean(values, weights)
    if np.isinf(v).any():
        return math.inf
    return min(z + math.fsum(w * np.maximum(v - z, 0.0)) / (1.0 - alpha) for z in v)


def oracle_avgq_left(values, weights, alpha: float) -> float:
    """``max_z z - E(z - X)_+ / alpha`` over the support points."""
    v, w = _clean(values, weights)
    fin = np.isfinite(v)
    if not fin.any():
        return math.inf
    best = -math.inf
    for z in v[fin]:
        best = max(best, z - math.fsum(w * np.maximum(z - v, 0.0)) / alpha)
    # with mass at +inf the candidate set also includes arbitrarily large z
    if not fin.all() and w[~fin].sum() > 1.0 - alpha + 1e-12:
        return math.inf
    return best


def oracle_expectile(values, weights, tau: float) -> float:
    v, w = _clean(values, weights)
    if np.isinf(v).any():
        return math.inf
    if v.min() == v.max():
        return float(v[0])

    def f(z):
        return tau * math.fsum(w * np.maximum(v - z, 0.0)) - (1 - tau) * math.fsum(w * np.maximum(z - v, 0.0))

    return brentq(f, v.min(), v.max(), xtol=1e-14, rtol=4 * np.finfo(float).eps)


def oracle_norm(values, weights, p: float, a: float) -> float:
    v, w = _clean(values, weights)
    if np.isinf(v).any():
        return math.inf
    m = math.fsum(w * v)
    return m + a * math.fsum(w * np.maximum(v - m, 0.0) ** p) ** (1.0 / p)


def _iid_law(values, weights, m: int, mode: str):
    v, w = _clean(values, weights)
    xs = sorted(set(v.tolist()))
    out_v, out_w = [], []
    for x in xs:
        F = math.fsum(w[v <= x])
        Fm = math.fsum(w[v < x])
        if mode == "max":
            pw = F ** m - Fm ** m
        else:
            pw = (1.0 - Fm) ** m - (1.0 - F) ** m
        if pw > 0:
            out_v.append(x)
            out_w.append(pw)
    return np.array(out_v), np.array(out_w) / math.fsum(out_w)


def oracle_gauge(gauge, values, weights=None) -> float:
    """Gauge of a finite weighted sample, computed without the engine."""
    k, p = gauge.kind, gauge.params
    v, w = _clean(values, weights)
    if k == "mean":
        return math.inf if np.isinf(v).any() else math.fsum(w * v)
    if k == "essinf":
        return float(v.min())
    if k == "esssup":
        return float(v.max())
    if k == "quantile":
        return oracle_quantile(v, w, p[0])
    if k == "quantile-upper":
        return oracle_quantile(v, w, p[0], upper=True)
    if k == "avgq-right":
        return oracle_avgq_right(v, w, p[0])
    if k == "avgq-left":
        return oracle_avgq_left(v, w, p[0])
    if k == "expectile":
        return oracle_expectile(v, w, p[0])
    if k == "norm":
        return oracle_norm(v, w, p[0], p[1])
    if k == "dual":
        if np.isinf(v).any():
            raise DomainError("dual gauge undefined with mass at +inf")
        return -oracle_gauge(gauge.inner, -v, w)
    if k in ("maxext", "minext"):
        lv, lw = _iid_law(v, w, int(p[0]), "max" if k == "maxext" else "min")
        return oracle_gauge(gauge.inner, lv, lw)
    raise UnsupportedGauge(f"no oracle for {gauge}")


# ---------------------------------------------------------------------------
# batched gauges over rows of a value matrix (common weights)


def batched_gauge(gauge, V, w) -> np.ndarray:
    """Gauge of every row of ``V`` under weights ``w``.

    Supports the elementary kinds; used by the brute-force enumeration.
    """
    V = np.asarray(V, dtype=float)
    w = np.asarray(w, dtype=float)
    w = w / w.sum()
    k, p = gauge.kind, gauge.params
    has_inf = np.isinf(V).any(axis=1)
    if k == "mean":
        out = np.where(has_inf, math.inf, np.nan_to_num(V, posinf=0.0) @ w)
        return out
    if k == "essinf":
        return V.min(axis=1)
    if k == "esssup":
        return V.max(axis=1)
    if k in ("quantile", "quantile-upper"):
        order = np.argsort(V, axis=1, kind="stable")
        Vs = np.take_along_axis(V, order, axis=1)
        F = np.cumsum(w[order], axis=1)
        # F evaluated at the last copy of each value
        same_next = np.concatenate([Vs[:, 1:] == Vs[:, :-1], np.zeros((V.shape[0], 1), bool)], axis=1)
        Fx = F.copy()
        for j in range(V.shape[1] - 2, -1, -1):
            Fx[:, j] = np.where(same_next[:, j], Fx[:, j + 1], F[:, j])
        ok = Fx >= p[0] - 1e-12 if k == "quantile" else Fx > p[0] + 1e-12
        ok[:, -1] = True
        return Vs[np.arange(V.shape[0]), ok.argmax(axis=1)]
    if k == "avgq-right":
        Z = V[:, :, None]
        with np.errstate(invalid="ignore"):  # inf - inf on rows that are inf anyway
            excess = np.maximum(V[:, None, :] - Z, 0.0) @ w
        cand = V + excess / (1.0 - p[0])
        return np.where(has_inf, math.inf, np.nanmin(np.where(np.isfinite(cand), cand, np.inf), axis=1))
    if k == "avgq-left":
        out = np.empty(V.shape[0])
        for i, row in enumerate(V):
            out[i] = oracle_avgq_left(row, w, p[0])
        return out
    if k == "expectile":
        tau = p[0]
        lo = V.min(axis=1)
        hi = V.max(axis=1)
        fin = ~has_inf
        lo_f, hi_f = lo[fin].copy(), hi[fin].copy()
        Vf = V[fin]
        for _ in range(200):
            mid = 0.5 * (lo_f + hi_f)
            d = Vf - mid[:, None]
            r = tau * (np.maximum(d, 0.0) @ w) - (1 - tau) * (np.maximum(-d, 0.0) @ w)
            up = r > 0
            lo_f = np.where(up, mid, lo_f)
            hi_f = np.where(up, hi_f, mid)
        out = np.full(V.shape[0], math.inf)
        out[fin] = 0.5 * (lo_f + hi_f)
        return out
    if k == "norm":
        fin = ~has_inf
        out = np.full(V.shape[0], math.inf)
        Vf = V[fin]
        m = Vf @ w
        dev = np.maximum(Vf - m[:, None], 0.0) ** p[0]
        out[fin] = m + p[1] * (dev @ w) ** (1.0 / p[0])
        return out
    raise UnsupportedGauge(f"no batched oracle for {gauge}")


# ---------------------------------------------------------------------------
# support functions and membership


def oracle_support(body, w) -> float:
    """Support function from the vertex and ray lists of a body."""
    w = np.asarray(w, dtype=float)
    if body.is_empty:
        return -math.inf
    for r in body.rays:
        if float(r @ w) > 1e-12 * np.linalg.norm(r) * np.linalg.norm(w):
            return math.inf
    return max(float(v @ w) for v in body.vertices)


def brute_region_membership(model, gauge, dense_grid, x, tol: float = 1e-9) -> bool:
    """Whether ``<x, w> <= g(h(X, w))`` at every direction of ``dense_grid``."""
    x = np.asarray(x, dtype=float)
    for w in np.atleast_2d(np.asarray(dense_grid, dtype=float)):
        vals = [oracle_support(b, w) for b in model.bodies]
        t = oracle_gauge(gauge, vals, model.probs)
        if t == -math.inf:
            return False
        if t < math.inf and float(x @ w) > t + tol * (1.0 + abs(t)):
            return False
    return True


def hrep_membership(constraints, x, tol: float = 1e-9) -> bool:
    """Constraint-by-constraint test of ``x`` against ``(normal, offset)`` pairs."""
    x = np.asarray(x, dtype=float)
    for n, b in constraints:
        if b == -math.inf:
            return False
        if b < math.inf and float(np.dot(n, x)) > b + tol * (1.0 + abs(b)):
            return False
    return True


def angular_lattice(n: int) -> np.ndarray:
    t = 2.0 * math.pi * np.arange(n) / n
    return np.column_stack((np.cos(t), np.sin(t)))


MAX_SCENARIOS = 6
MAX_ATOMS = 3
MAX_LATTICE = 48


def brute_conditional_enumeration(model, atom_labels, gauge, lattice) -> Dict[str, List[Tuple[np.ndarray, float]]]:
    """Conditional gauge region by enumerating measurable directions.

    Every map from atoms to lattice directions defines a direction ``W``
    constant on atoms.  For each such ``W`` the random variable
    ``h(X, W)`` is formed over all scenarios and its conditional gauge is
    taken atom by atom, giving one half-space per atom.  The result lists,
    per atom, the distinct ``(normal, offset)`` pairs collected over all
    maps.
    """
    lattice = np.atleast_2d(np.asarray(lattice, dtype=float))
    n = len(model)
    labels = list(dict.fromkeys(atom_labels))
    if n > MAX_SCENARIOS or len(labels) > MAX_ATOMS or lattice.shape[0] > MAX_LATTICE:
        raise SizeLimitError(
            f"enumeration limited to {MAX_SCENARIOS} scenarios, {MAX_ATOMS} atoms and "
            f"{MAX_LATTICE} directions")
    if len(atom_labels) != n:
        raise DomainError("one atom label per scenario is required")
    L = lattice.shape[0]
    # support table: scenario x lattice direction
    H = np.array([[oracle_support(b, w) for w in lattice] for b in model.bodies])
    atom_of = np.array([labels.index(a) for a in atom_labels])
    maps = np.array(list(itertools.product(range(L), repeat=len(labels))))  # M x atoms
    # h(X_i, W) for every map and scenario
    dir_idx = maps[:, atom_of]                                            # M x n
    Hv = H[np.arange(n)[None, :], dir_idx]                                # M x n
    out = {}
    probs = np.asarray(model.probs)
    for a, label in enumerate(labels):
        cols = np.flatnonzero(atom_of == a)
        g = batched_gauge(gauge, Hv[:, cols], probs[cols])
        pairs = {}
        for m_idx, val in zip(maps[:, a], g):
            key = int(m_idx)
            if key in pairs and pairs[key] != val:
                raise AssertionError("conditional gauge depends on directions outside the atom")
            pairs[key] = float(val)
        out[label] = [(lattice[k], pairs[k]) for k in sorted(pairs)]
    return out


# ---------------------------------------------------------------------------
# cone models with closed-form Vorob'ev quantiles


def cone_coverage(model, W) -> np.ndarray:
    """``P(w in C°)`` for every row of ``W`` by testing each generator."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    cover = np.zeros(W.shape[0])
    for b, p in zip(model.bodies, model.probs):
        ok = np.ones(W.shape[0], dtype=bool)
        for g in b.rays:
            ok &= W @ g <= 1e-12 * np.linalg.norm(g)
        cover += p * ok
    return cover


def lognormal_levels(n: int, sigma: float = 0.2) -> np.ndarray:
    """``2 + exp(sigma z_j)`` at the mid-point normal quantiles ``z_j``."""
    u = (np.arange(n) + 0.5) / n
    return 2.0 + np.exp(sigma * np.array([normal_quantile(x) for x in u]))


def vorobev_lognormal_boundary(alpha: float, sigma: float = 0.2, convention: str = "threshold") -> float:
    """Boundary parameter ``s`` of the Vorob'ev quantile in the lognormal cone example.

    The quantile is the cone between ``(-s, -1)`` and ``(-1, -s)``.
    ``threshold`` keeps directions with coverage at least ``alpha``;
    ``complement`` uses coverage at least ``1 - alpha``.
    """
    if convention == "threshold":
        return 2.0 + math.exp(sigma * normal_quantile(1.0 - alpha))
    if convention == "complement":
        return 2.0 + math.exp(sigma * normal_quantile(alpha))
    raise DomainError(f"unknown convention {convention!r}")


def discrete_vorobev_boundary(levels, alpha: float) -> float:
    """Largest ``s`` with ``#{levels >= s} / n >= alpha`` (equal weights)."""
    lv = np.sort(np.asarray(levels, dtype=float))[::-1]
    k = max(1, math.ceil(alpha * lv.size - 1e-9))
    return float(lv[k - 1])


def bid_ask_model(kappas, probs=None):
    """Random cones with ``(-k1, 1)`` and ``(1, -k2)`` on the boundary.

    Each cone contains the negative quadrant; ``kappas`` lists ``(k1, k2)``
    pairs with ``k1 k2 >= 1``.
    """
    from .geometry import ConvexBody
    from .scenario import RandomSetModel, Scenario

    n = len(kappas)
    p = [1.0 / n] * n if probs is None else probs
    return RandomSetModel([Scenario(pi, ConvexBody.cone([(-k1, 1.0), (1.0, -k2)], dim=2))
                           for (k1, k2), pi in zip(kappas, p)])


def lognormal_cone_model(n: int, sigma: float = 0.2):
    """Cones containing the positive quadrant with ``(-1, s)`` and ``(s, -1)``
    on the boundary, ``s - 2`` lognormal, discretised at ``n`` levels."""
    from .geometry import ConvexBody
    from .scenario import RandomSetModel, Scenario

    return RandomSetModel([Scenario(1.0 / n, ConvexBody.cone([(-1.0, s), (s, -1.0)], dim=2))
                           for s in lognormal_levels(n, sigma)])
