"""Set-valued gauges of random convex sets.

The general path is the Wulff construction: evaluate the scalar gauge of
the support function in every grid direction and intersect the resulting
half-spaces.  Cone models, translated cones and Gaussian samples have
closed-form paths.  Conditioning on a finite partition is done atom by
atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DomainError,
    MissingHRepError,
    NotPositiveDefiniteError,
    PreconditionError,
)
from .geometry import (
    TWO_PI,
    ConvexBody,
    HalfSpace,
    Region,
    canonical_2d,
    cone_body_2d,
    default_grid,
    direction_grid,
    intersect_halfspaces_2d,
    planar_cone,
    polar_cone_2d,
    prune_vertices,
    region_from_hrep,
)
from .lp import hrep_feasible
from .scalar import GaugeSpec, eval_gauge
from .scenario import Partition, RandomSetModel, Scenario, scalarize_many

ARC_TOL = 1e-12
COVER_TOL = 1e-12


# ---------------------------------------------------------------------------
# grids and requests


@dataclass(frozen=True)
class GridSpec:
    """Parameters of a direction grid (see :func:`direction_grid`)."""

    n: int
    scheme: Optional[str] = None
    seed: int = 0

    def directions(self, d: int) -> np.ndarray:
        scheme = self.scheme or ("uniform2d" if d == 2 else "fibonacci" if d == 3 else "random")
        return direction_grid(d, self.n, scheme, self.seed)


GridLike = Union[None, int, GridSpec, np.ndarray, Sequence[Sequence[float]]]


def resolve_grid(d: int, grid: GridLike) -> np.ndarray:
    """Direction array from ``None`` (default grid), a size, a spec or rows."""
    if grid is None:
        return default_grid(d)
    if isinstance(grid, (int, np.integer)):
        return GridSpec(int(grid)).directions(d)
    if isinstance(grid, GridSpec):
        return grid.directions(d)
    W = np.atleast_2d(np.asarray(grid, dtype=float))
    if W.shape[1] != d:
        raise DomainError(f"grid directions must have {d} coordinates")
    if W.shape[0] < 4:
        raise DomainError("a direction grid needs at least 4 directions")
    if (np.linalg.norm(W, axis=1) == 0).any():
        raise DomainError("grid directions must be nonzero")
    return W


@dataclass(frozen=True)
class RegionRequest:
    gauge: GaugeSpec
    grid: GridLike = None
    partition: Optional[Partition] = None
    exact_path: Optional[str] = None  # "cone", "translated_cone" or "gaussian"

    def __post_init__(self):
        if self.exact_path not in (None, "cone", "translated_cone", "gaussian"):
            raise DomainError(f"unknown exact path {self.exact_path!r}")


@dataclass
class ConditionalRegionResult:
    regions: Dict[str, Region]
    directions: int
    dropped: Dict[str, int] = field(default_factory=dict)
    empty: Dict[str, bool] = field(default_factory=dict)

    def __getitem__(self, label) -> Region:
        return self.regions[label]

    @property
    def labels(self):
        return list(self.regions)


# ---------------------------------------------------------------------------
# Wulff construction


def gauge_offsets(model: RandomSetModel, gauge: GaugeSpec, W) -> np.ndarray:
    """``g(h(X, w))`` for every row ``w`` of ``W``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    out = np.empty(W.shape[0])
    for j, s in scalarize_many(model, W):
        out[j] = eval_gauge(gauge, s)
    return out


def region_from_offsets(W, t, d: int) -> Region:
    """Intersection of ``<x, w_j> <= t_j``; infinite offsets drop out."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    t = np.asarray(t, dtype=float)
    if (t == -math.inf).any():
        return Region([], empty=True, dim=d)
    cons = [HalfSpace(w, float(tj)) for w, tj in zip(W, t) if tj < math.inf]
    return region_from_hrep(cons, dim=d)


def wulff_region(model: RandomSetModel, gauge: GaugeSpec, grid: GridLike = None) -> Region:
    """Outer approximation of the set-valued gauge on a direction grid.

    The support function of the result is at most ``g(h(X, w))`` at every
    grid direction, with equality when the gauge is sublinear.
    """
    W = resolve_grid(model.dim, grid)
    return region_from_offsets(W, gauge_offsets(model, gauge, W), model.dim)


def _atom_model(model: RandomSetModel, partition: Partition, label) -> RandomSetModel:
    a = partition[label]
    return model.restrict(a.indices, a.weights)


def conditional_regions(model: RandomSetModel, partition: Optional[Partition],
                        gauge: GaugeSpec, grid: GridLike = None) -> ConditionalRegionResult:
    """Per-atom Wulff regions of the conditional scalarisations."""
    if partition is None:
        partition = Partition.trivial(model)
    if partition.size != len(model):
        raise DomainError("partition size differs from the number of scenarios")
    W = resolve_grid(model.dim, grid)
    res = ConditionalRegionResult({}, W.shape[0])
    for label in partition.labels:
        t = gauge_offsets(_atom_model(model, partition, label), gauge, W)
        reg = region_from_offsets(W, t, model.dim)
        res.regions[label] = reg
        res.dropped[label] = int((t == math.inf).sum())
        res.empty[label] = reg.is_empty()
    return res


# ---------------------------------------------------------------------------
# selection expectation, core and hull


def _weighted_sum(bodies, weights) -> ConvexBody:
    d = bodies[0].dim
    V = np.zeros((1, d))
    rays = []
    for b, p in zip(bodies, weights):
        if b.vertices is None:
            raise PreconditionError("selection expectation needs vertex descriptions")
        V = prune_vertices((V[:, None, :] + p * b.vertices[None, :, :]).reshape(-1, d))
        rays.append(b.rays)
    R = np.vstack(rays)
    body = ConvexBody(V, R, is_cone=all(b.is_cone for b in bodies))
    return canonical_2d(body) if d == 2 else body


def selection_expectation(model: RandomSetModel,
                          partition: Optional[Partition] = None) -> Dict[str, ConvexBody]:
    """Per-atom weighted Minkowski average of the scenario bodies."""
    partition = partition or Partition.trivial(model)
    out = {}
    for label in partition.labels:
        a = partition[label]
        out[label] = _weighted_sum([model.scenarios[i].body for i in a.indices], a.weights)
    return out


def conditional_core(model: RandomSetModel,
                     partition: Optional[Partition] = None) -> Dict[str, ConvexBody]:
    """Per-atom intersection of the scenario bodies (possibly empty)."""
    partition = partition or Partition.trivial(model)
    d = model.dim
    out = {}
    for label in partition.labels:
        cons = []
        for i in partition[label].indices:
            h = model.scenarios[i].body.hrep
            if h is None:
                raise MissingHRepError(
                    f"scenario {i} has no half-space description (needed in dimension {d})")
            cons.extend(h)
        if d == 2:
            reg = intersect_halfspaces_2d(cons)
            out[label] = reg.to_body() if not reg.is_empty() else ConvexBody.empty(2)
        else:
            live = [c for c in cons if not c.is_whole_space]
            if any(c.is_empty for c in live):
                out[label] = ConvexBody.empty(d)
            elif not live:
                out[label] = ConvexBody.whole_space(d)
            elif not hrep_feasible(np.array([c.normal for c in live]),
                                   np.array([c.offset for c in live])):
                out[label] = ConvexBody.empty(d)
            else:
                out[label] = ConvexBody(None, hrep=live, dim=d)
    return out


def conditional_hull(model: RandomSetModel,
                     partition: Optional[Partition] = None) -> Dict[str, ConvexBody]:
    """Per-atom closed convex hull of the union of scenario bodies."""
    partition = partition or Partition.trivial(model)
    out = {}
    for label in partition.labels:
        bodies = [model.scenarios[i].body for i in partition[label].indices]
        if any(b.vertices is None for b in bodies):
            raise PreconditionError("the conditional hull needs vertex descriptions")
        V = np.vstack([b.vertices for b in bodies])
        R = np.vstack([b.rays for b in bodies])
        body = ConvexBody(prune_vertices(V), R, is_cone=all(b.is_cone for b in bodies))
        out[label] = canonical_2d(body) if model.dim == 2 else body
    return out


# ---------------------------------------------------------------------------
# random cones


def _is_cone(body: ConvexBody) -> bool:
    return (not body.is_empty and body.vertices is not None
            and np.abs(body.vertices).max(initial=0.0) == 0.0)


def _require_cones(model: RandomSetModel):
    for i, b in enumerate(model.bodies):
        if not _is_cone(b):
            raise PreconditionError(f"scenario {i} is not a cone")


def fixed_polar_cone(cone_model: RandomSetModel) -> ConvexBody:
    """``m(C°)``: directions lying in every scenario polar (2-D)."""
    _require_cones(cone_model)
    if cone_model.dim != 2:
        raise DomainError("fixed_polar_cone is planar; use the generator union in higher dimension")
    cons = [HalfSpace(g, 0.0) for b in cone_model.bodies for g in b.rays]
    reg = intersect_halfspaces_2d(cons)
    return cone_body_2d(planar_cone(reg.rays))


def cone_gauge_g9(cone_model: RandomSetModel, gauge: Optional[GaugeSpec] = None) -> ConvexBody:
    """``(m(C°))°``, the set-valued gauge of a random cone under (g9).

    With ``gauge`` given, the cone is rebuilt from the gauge values at the
    generators of ``m(C°)`` (zero for every (g9) gauge), which exercises the
    scalar path; without it the polar is taken directly.  In dimension
    three or more the result is the cone generated by all scenario rays.
    """
    _require_cones(cone_model)
    if gauge is not None and not gauge.is_g9:
        raise PreconditionError(f"gauge {gauge} does not satisfy (g9)")
    d = cone_model.dim
    if d != 2:
        G = np.vstack([b.rays for b in cone_model.bodies])
        return ConvexBody.cone(G, dim=d)
    m = fixed_polar_cone(cone_model)
    if gauge is None:
        return polar_cone_2d(m.rays)
    D = m.rays
    if D.shape[0] == 0:
        return ConvexBody.whole_space(2)
    t = gauge_offsets(cone_model, gauge, D)
    reg = region_from_offsets(D, t, 2)
    return ConvexBody(np.zeros((1, 2)), planar_cone(reg.rays).generators(), is_cone=True)


def _polar_arcs(body: ConvexBody) -> List[Tuple[float, float]]:
    pol = planar_cone(body.rays).polar()
    k = pol.kind

    def ang(v):
        return math.atan2(v[1], v[0]) % TWO_PI

    if k == "zero":
        return []
    if k == "plane":
        return [(0.0, TWO_PI)]
    if k == "ray":
        a = ang(pol.first)
        return [(a, a)]
    if k == "line":
        a = ang(pol.first)
        return [(a, a), ((a + math.pi) % TWO_PI, (a + math.pi) % TWO_PI)]
    a = ang(pol.first)
    if k == "halfplane":
        return [(a, a + math.pi)]
    b = ang(pol.last)
    if b < a:
        b += TWO_PI
    return [(a, b)]


def _coverage(arcs, probs, phi):
    """Probability that the direction at angle ``phi`` lies in the polar."""
    tot = 0.0
    for scen_arcs, p in zip(arcs, probs):
        for a, b in scen_arcs:
            if b - a >= TWO_PI - ARC_TOL or (phi - a) % TWO_PI <= b - a + ARC_TOL \
                    or (a - phi) % TWO_PI <= ARC_TOL:
                tot += p
                break
    return tot


def vorobev_arcs(cone_model: RandomSetModel, alpha: float) -> List[Tuple[float, float]]:
    """Angular arcs of ``{w : P(w in C°) >= alpha}`` by an exact sweep.

    Each arc is ``(start, end)`` in radians with ``start`` in ``[0, 2 pi)``
    and ``end >= start``; ``[(0, 2 pi)]`` is the whole plane.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError("Vorob'ev level must lie in (0, 1]")
    _require_cones(cone_model)
    if cone_model.dim != 2:
        raise DomainError("the arc sweep is planar; use vorobev_directions")
    arcs = [_polar_arcs(b) for b in cone_model.bodies]
    probs = cone_model.probs
    ev = sorted({x % TWO_PI for sa in arcs for a, b in sa if b - a < TWO_PI - ARC_TOL
                 for x in (a, b)})
    events = []
    for e in ev:
        if not events or e - events[-1] > ARC_TOL:
            events.append(e)
    if len(events) > 1 and events[0] + TWO_PI - events[-1] <= ARC_TOL:
        events.pop()
    level = alpha - COVER_TOL
    if not events:
        return [(0.0, TWO_PI)] if _coverage(arcs, probs, 0.0) >= level else []
    K = len(events)
    # cyclic elements: point e_k, then open interval (e_k, e_{k+1})
    elems = []
    for k in range(K):
        a = events[k]
        b = events[k + 1] if k + 1 < K else events[0] + TWO_PI
        elems.append((a, a, _coverage(arcs, probs, a) >= level))
        elems.append((a, b, _coverage(arcs, probs, 0.5 * (a + b)) >= level))
    if all(c for _, _, c in elems):
        return [(0.0, TWO_PI)]
    start = next(i for i, (_, _, c) in enumerate(elems) if not c)
    order = elems[start + 1:] + [(a + TWO_PI, b + TWO_PI, c) for a, b, c in elems[:start + 1]]
    out = []
    run = None
    for a, b, c in order:
        if c:
            run = (a, b) if run is None else (run[0], b)
        elif run is not None:
            out.append(run)
            run = None
    if run is not None:
        out.append(run)
    res = []
    for a, b in out:
        s = a % TWO_PI
        res.append((s, s + (b - a)))
    return sorted(res)


def _arc_generators(arcs) -> np.ndarray:
    gens = []
    for a, b in arcs:
        steps = max(1, int(math.ceil((b - a) / (math.pi / 4))))
        for t in np.linspace(a, b, steps + 1):
            gens.append((math.cos(t), math.sin(t)))
    return np.array(gens).reshape(-1, 2)


def vorobev_quantile(cone_model: RandomSetModel, alpha: float, grid: GridLike = None) -> ConvexBody:
    """Closed convex conic hull of the Vorob'ev quantile of ``C°``.

    Exact in the plane (see :func:`vorobev_arcs` for the possibly
    non-convex angular set itself); grid-sampled in higher dimension.
    """
    if cone_model.dim == 2:
        return cone_body_2d(planar_cone(_arc_generators(vorobev_arcs(cone_model, alpha))))
    return ConvexBody.cone(vorobev_directions(cone_model, alpha, grid), dim=cone_model.dim)


def vorobev_directions(cone_model: RandomSetModel, alpha: float, grid: GridLike = None) -> np.ndarray:
    """Grid directions ``w`` with ``P(w in C°) >= alpha``."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("Vorob'ev level must lie in (0, 1]")
    _require_cones(cone_model)
    W = resolve_grid(cone_model.dim, grid)
    cover = np.zeros(W.shape[0])
    for b, p in zip(cone_model.bodies, cone_model.probs):
        if b.rays.shape[0] == 0:
            inside = np.ones(W.shape[0], dtype=bool)
        else:
            inside = ((W @ b.rays.T) <= 1e-12 * np.linalg.norm(b.rays, axis=1)).all(axis=1)
        cover += p * inside
    return W[cover >= alpha - COVER_TOL]


def cone_gauge_quantile(cone_model: RandomSetModel, alpha: float, grid: GridLike = None) -> ConvexBody:
    """Polar of the Vorob'ev quantile; the quantile and left-average gauge of a cone."""
    Q = vorobev_quantile(cone_model, alpha, grid)
    if cone_model.dim == 2:
        return polar_cone_2d(Q.rays)
    cons = [HalfSpace(w, 0.0) for w in Q.rays]
    if not cons:
        return ConvexBody.whole_space(cone_model.dim)
    return ConvexBody(None, hrep=cons, dim=cone_model.dim, is_cone=True)


def translated_cone_gauge(point_model: RandomSetModel, cone: ConvexBody, gauge: GaugeSpec,
                          grid: GridLike = None, fallback: bool = False) -> Region:
    """Gauge of ``X + c`` for a random point ``X`` and deterministic cone ``c``.

    Only directions in the polar cone carry finite support values; the
    grid is restricted to them and, in the plane, the polar generators are
    added, which makes the region absorb ``c`` as its recession cone.
    With ``fallback`` set, non-sublinear gauges go through
    :func:`wulff_region` on the summed model instead of raising.
    """
    if not point_model.is_singleton:
        raise PreconditionError("translated_cone_gauge needs singleton scenarios")
    if not _is_cone(cone):
        raise PreconditionError("the deterministic summand must be a cone")
    d = point_model.dim
    if not gauge.is_sublinear:
        if not fallback:
            raise PreconditionError(f"gauge {gauge} is not sublinear")
        return wulff_region(point_model.add_cone(cone), gauge, grid)
    W = resolve_grid(d, grid)
    if cone.rays.shape[0]:
        tol = 1e-12 * np.linalg.norm(cone.rays, axis=1)
        W = W[((W @ cone.rays.T) <= tol).all(axis=1)]
    if d == 2:
        pol = planar_cone(cone.rays).polar()
        G = pol.generators()
        if G.shape[0]:
            G = G / np.linalg.norm(G, axis=1)[:, None]
            W = np.vstack([W, G]) if W.shape[0] else G
    if W.shape[0] == 0:
        return region_from_hrep([], dim=d) if d == 2 else Region([], dim=d)
    return region_from_offsets(W, gauge_offsets(point_model, gauge, W), d)


# ---------------------------------------------------------------------------
# depth regions and closed forms

_PRESETS = {
    "tukey": (1, lambda a: GaugeSpec.quantile(a)),
    "zonoid": (1, lambda a: GaugeSpec.avgq_right(a)),
    "expectile": (1, lambda t: GaugeSpec.expectile(t)),
    "norm": (2, lambda p, a: GaugeSpec.norm(p, a)),
}


def depth_gauge(preset) -> GaugeSpec:
    """Gauge behind a depth preset such as ``"tukey:0.1"`` or ``("norm", 2, 1)``."""
    if isinstance(preset, str):
        name, *args = preset.split(":")
    else:
        name, *args = preset
    if name not in _PRESETS:
        raise DomainError(f"unknown depth preset {name!r}")
    arity, make = _PRESETS[name]
    if len(args) != arity:
        raise DomainError(f"preset {name!r} takes {arity} parameter(s)")
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise DomainError(f"non-numeric parameter in preset {preset!r}") from None
    return make(*vals)


def depth_region(preset, point_model: RandomSetModel, grid: GridLike = None,
                 partition: Optional[Partition] = None):
    """Depth-trimmed region of a point sample via the matching gauge."""
    if not point_model.is_singleton:
        raise PreconditionError("depth regions need singleton scenarios")
    gauge = depth_gauge(preset)
    if partition is not None:
        return conditional_regions(point_model, partition, gauge, grid)
    return wulff_region(point_model, gauge, grid)


class EllipsoidSupport:
    """Support function ``u -> <mu, u> + g1 <Sigma u, u>^(1/2)``."""

    def __init__(self, mu, sigma, g1: float):
        self.mu = np.asarray(mu, dtype=float).ravel()
        S = np.asarray(sigma, dtype=float)
        d = self.mu.size
        if S.shape != (d, d):
            raise DomainError(f"covariance must be {d}x{d}")
        if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(S).max())):
            raise NotPositiveDefiniteError("covariance matrix is not symmetric")
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError("covariance matrix is not positive definite") from None
        self.sigma = S
        self.g1 = float(g1)

    @property
    def dim(self) -> int:
        return self.mu.size

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(self.mu @ u + self.g1 * math.sqrt(max(0.0, u @ self.sigma @ u)))

    def support_many(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        q = np.einsum("ij,jk,ik->i", W, self.sigma, W)
        return W @ self.mu + self.g1 * np.sqrt(np.maximum(q, 0.0))

    def region(self, grid: GridLike = None) -> Region:
        """Polygonal outer approximation, exact at the grid directions.

        Only meaningful when ``g1 >= 0`` (the support is then sublinear).
        """
        W = resolve_grid(self.dim, grid)
        return region_from_offsets(W, self.support_many(W), self.dim)


def gaussian_closed_form_region(mu, sigma, g1: float) -> EllipsoidSupport:
    return EllipsoidSupport(mu, sigma, g1)


def singleton_collapse_check(point_model: RandomSetModel, partition: Optional[Partition],
                             gauge: GaugeSpec, grid: GridLike = None,
                             tol: float = 1e-9) -> Dict[str, ConvexBody]:
    """Per-atom collapse of a superlinear gauge of a random point.

    For a superlinear gauge the width ``g(<X,w>) + g(<X,-w>)`` is never
    positive; the region is the point ``(g(X_1), ..., g(X_d))`` when every
    width vanishes and empty as soon as one is negative.
    """
    if not point_model.is_singleton:
        raise PreconditionError("singleton_collapse_check needs singleton scenarios")
    if not gauge.is_superlinear:
        raise PreconditionError(f"gauge {gauge} is not superlinear")
    partition = partition or Partition.trivial(point_model)
    d = point_model.dim
    W = resolve_grid(d, grid)
    eye = np.eye(d)
    out = {}
    for label in partition.labels:
        sub = _atom_model(point_model, partition, label)
        tp = gauge_offsets(sub, gauge, W)
        tn = gauge_offsets(sub, gauge, -W)
        scale = 1.0 + np.abs(sub.points).max()
        width = tp + tn
        if (width < -tol * scale).any():
            out[label] = ConvexBody.empty(d)
            continue
        if (width > tol * scale).any():
            raise PreconditionError("positive gauge width: the gauge is not superadditive here")
        out[label] = ConvexBody.point(gauge_offsets(sub, gauge, eye))
    return out


# ---------------------------------------------------------------------------
# request dispatch


def _common_cone(model: RandomSetModel) -> Optional[ConvexBody]:
    bodies = model.bodies
    if any(b.vertices is None or b.vertices.shape[0] != 1 for b in bodies):
        return None
    R = bodies[0].rays
    for b in bodies[1:]:
        if b.rays.shape != R.shape or not np.array_equal(b.rays, R):
            return None
    return ConvexBody.cone(R, dim=model.dim)


def run_request(model: RandomSetModel, req: RegionRequest):
    """Dispatch a :class:`RegionRequest` to the matching engine path.

    Returns a :class:`ConditionalRegionResult` for the Wulff and translated
    cone paths and a label-to-body mapping for the cone path.
    """
    partition = req.partition or Partition.trivial(model)
    if req.exact_path is None:
        return conditional_regions(model, partition, req.gauge, req.grid)
    if req.exact_path == "cone":
        _require_cones(model)
        out = {}
        for label in partition.labels:
            sub = _atom_model(model, partition, label)
            if req.gauge.is_g9:
                out[label] = cone_gauge_g9(sub, req.gauge)
            elif req.gauge.kind in ("quantile", "avgq-left"):
                out[label] = cone_gauge_quantile(sub, req.gauge.params[0], req.grid)
            else:
                raise PreconditionError(f"no closed form for the cone gauge {req.gauge}")
        return out
    if req.exact_path == "translated_cone":
        cone = _common_cone(model)
        if cone is None:
            raise PreconditionError("scenarios are not translates of one common cone")
        points = RandomSetModel([Scenario(s.prob, ConvexBody.point(s.body.vertices[0]), s.atom)
                                 for s in model.scenarios])
        W = resolve_grid(model.dim, req.grid)
        res = ConditionalRegionResult({}, W.shape[0])
        for label in partition.labels:
            reg = translated_cone_gauge(_atom_model(points, partition, label), cone, req.gauge, W)
            res.regions[label] = reg
            res.empty[label] = reg.is_empty()
            res.dropped[label] = 0
        return res
    # gaussian: moment fit plus the closed-form standard normal constant
    from .oracles import normal_gauge_constants

    if not model.is_singleton:
        raise PreconditionError("the Gaussian path needs singleton scenarios")
    g1 = normal_gauge_constants(req.gauge)
    W = resolve_grid(model.dim, req.grid)
    res = ConditionalRegionResult({}, W.shape[0])
    for label in partition.labels:
        sub = _atom_model(model, partition, label)
        mu = sub.probs @ sub.points
        C = sub.points - mu
        sigma = (C * sub.probs[:, None]).T @ C
        reg = EllipsoidSupport(mu, sigma, g1).region(W)
        res.regions[label] = reg
        res.empty[label] = reg.is_empty()
        res.dropped[label] = 0
    return res
