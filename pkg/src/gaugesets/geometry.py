"""Closed convex sets as generalised polyhedra.

A :class:`ConvexBody` is ``conv(V) + cone(R)`` with an optional attached
half-space description.  Support functions are exact and total on this
representation, including unbounded sets.  In the plane, half-space
intersections are computed exactly (:func:`intersect_halfspaces_2d`);
in higher dimension regions stay as half-space lists and are queried by
linear programming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lp
from .errors import DegenerateError, DomainError, PreconditionError, SingularMatrixError

POS_INF = math.inf
NEG_INF = -math.inf

FEAS_TOL = 1e-9
RAY_TOL = 1e-12
ANGLE_TOL = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """``{x : <normal, x> <= offset}``.

    ``offset = +inf`` or a zero normal (with non-negative offset) is the
    whole space; ``offset = -inf`` is the empty set.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float).ravel())
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def is_whole_space(self) -> bool:
        return self.offset == POS_INF or (not self.normal.any() and self.offset >= 0)

    @property
    def is_empty(self) -> bool:
        return self.offset == NEG_INF or (not self.normal.any() and self.offset < 0)

    def __repr__(self):
        return f"HalfSpace({self.normal.tolist()}, {self.offset!r})"


def _as_rows(points, d=None) -> np.ndarray:
    if points is None:
        return np.zeros((0, d or 0))
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, d if d is not None else (arr.shape[-1] if arr.ndim == 2 else 0)))
    return np.atleast_2d(arr)


class ConvexBody:
    """Generalised polyhedron ``conv(vertices) + cone(rays)``.

    Bodies in dimension three or more may instead carry only a half-space
    list (``vertices is None``); their support function is then evaluated
    by linear programming.  ``ConvexBody.empty(d)`` is the explicit empty
    set.
    """

    __slots__ = ("dim", "vertices", "rays", "_hrep", "is_cone", "is_empty")

    def __init__(self, vertices, rays=None, hrep=None, is_cone=False, dim=None, _empty=False):
        self.is_empty = bool(_empty)
        self.is_cone = bool(is_cone)
        if vertices is None:
            if hrep is None and not _empty:
                raise DomainError("a body needs vertices or a half-space list")
            self.vertices = None
            self.dim = int(dim if dim is not None else len(hrep[0].normal))
        else:
            V = _as_rows(vertices, dim)
            if V.shape[0] == 0 and not _empty:
                raise DomainError("a nonempty body needs at least one vertex")
            self.vertices = V
            self.dim = int(V.shape[1]) if V.shape[0] else int(dim)
        R = _as_rows(rays, self.dim)
        if R.shape[0]:
            norms = np.linalg.norm(R, axis=1)
            R = R[norms > 0]
        self.rays = R.reshape(-1, self.dim)
        self._hrep = None if hrep is None else tuple(hrep)
        if self.is_cone and self.vertices is not None and np.abs(self.vertices).max(initial=0.0) > 0:
            raise DomainError("a cone body has the origin as its only vertex")

    # constructors -------------------------------------------------------
    @classmethod
    def empty(cls, d: int) -> "ConvexBody":
        return cls(np.zeros((0, d)), dim=d, _empty=True)

    @classmethod
    def point(cls, x) -> "ConvexBody":
        return cls([np.asarray(x, dtype=float)])

    @classmethod
    def box(cls, lo, hi) -> "ConvexBody":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or (lo > hi).any():
            raise DomainError("box needs lo <= hi componentwise")
        d = lo.size
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(d, -1).T
        hrep = []
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            hrep.append(HalfSpace(e, hi[i]))
            hrep.append(HalfSpace(-e, -lo[i]))
        return cls(np.unique(corners, axis=0), hrep=hrep)

    @classmethod
    def polytope(cls, vertices, rays=None) -> "ConvexBody":
        return cls(vertices, rays)

    @classmethod
    def cone(cls, generators, dim=None) -> "ConvexBody":
        G = _as_rows(generators, dim)
        d = G.shape[1] if G.shape[0] else int(dim)
        return cls(np.zeros((1, d)), G, is_cone=True)

    @classmethod
    def translated_cone(cls, apex, generators) -> "ConvexBody":
        return cls([np.asarray(apex, dtype=float)], generators)

    @classmethod
    def halfspace(cls, normal, offset) -> "ConvexBody":
        n = np.asarray(normal, dtype=float)
        nn = float(n @ n)
        if nn == 0:
            raise DomainError("half-space normal must be nonzero")
        d = n.size
        anchor = n * (offset / nn)
        # orthonormal basis of the boundary hyperplane
        q, _ = np.linalg.qr(np.column_stack([n, np.eye(d)]))
        basis = q[:, 1:d].T
        rays = np.vstack([basis, -basis, -n / math.sqrt(nn)])
        return cls([anchor], rays, hrep=[HalfSpace(n, offset)])

    @classmethod
    def whole_space(cls, d: int) -> "ConvexBody":
        eye = np.eye(d)
        return cls(np.zeros((1, d)), np.vstack([eye, -eye]), hrep=[], is_cone=True)

    # queries ------------------------------------------------------------
    @property
    def has_vrep(self) -> bool:
        return self.vertices is not None

    @property
    def hrep(self):
        """Half-space list; derived exactly in the plane when not supplied."""
        if self._hrep is None and not self.is_empty and self.dim == 2:
            self._hrep = tuple(hrep_2d(self))
        return self._hrep

    def support(self, w) -> float:
        return support(self, w)

    def __repr__(self):
        if self.is_empty:
            return f"ConvexBody.empty({self.dim})"
        if self.vertices is None:
            return f"ConvexBody(hrep={len(self._hrep)} half-spaces, dim={self.dim})"
        return f"ConvexBody(vertices={self.vertices.tolist()}, rays={self.rays.tolist()})"


# ---------------------------------------------------------------------------
# support functions


def support(body: ConvexBody, w) -> float:
    """``sup{<w, x> : x in body}``; ``-inf`` for the empty set."""
    w = np.asarray(w, dtype=float)
    if body.is_empty:
        return NEG_INF
    if body.vertices is None:
        return support_of_hrep(body._hrep, w)
    if body.rays.shape[0]:
        dots = body.rays @ w
        scale = RAY_TOL * np.linalg.norm(body.rays, axis=1) * np.linalg.norm(w)
        if (dots > scale).any():
            return POS_INF
    return float((body.vertices @ w).max())


def support_many(body: ConvexBody, W) -> np.ndarray:
    """Support function at every row of ``W``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if body.is_empty:
        return np.full(W.shape[0], NEG_INF)
    if body.vertices is None:
        return np.array([support_of_hrep(body._hrep, w) for w in W])
    out = (W @ body.vertices.T).max(axis=1)
    if body.rays.shape[0]:
        dots = W @ body.rays.T
        scale = RAY_TOL * np.outer(np.linalg.norm(W, axis=1), np.linalg.norm(body.rays, axis=1))
        out[(dots > scale).any(axis=1)] = POS_INF
    return out


def _hrep_arrays(constraints, d=None):
    live = [c for c in constraints if not c.is_whole_space]
    if any(c.is_empty for c in live):
        return None, None
    if not live:
        return np.zeros((0, d or 0)), np.zeros(0)
    A = np.array([c.normal for c in live])
    b = np.array([c.offset for c in live])
    return A, b


def support_of_hrep(constraints: Sequence[HalfSpace], w) -> float:
    """Support function of ``{x : <n_i, x> <= b_i for all i}`` by LP."""
    w = np.asarray(w, dtype=float)
    A, b = _hrep_arrays(constraints, w.size)
    if A is None:
        return NEG_INF
    if A.shape[0] == 0:
        return 0.0 if not w.any() else POS_INF
    return lp.hrep_support(A, b, w)


# ---------------------------------------------------------------------------
# planar cones


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _rot90(v):
    return np.array([-v[1], v[0]])


def _rotm90(v):
    return np.array([v[1], -v[0]])


@dataclass(frozen=True, eq=False)
class PlanarCone:
    """A closed convex cone in the plane described by its shape.

    ``kind`` is one of ``zero``, ``ray``, ``wedge`` (pointed, two extreme
    rays ``first`` then ``last`` counter-clockwise), ``halfplane``
    (boundary from ``first`` counter-clockwise to ``last = -first``),
    ``line`` or ``plane``.
    """

    kind: str
    first: Optional[np.ndarray] = None
    last: Optional[np.ndarray] = None

    def generators(self) -> np.ndarray:
        """Rays whose conic hull is the cone."""
        k = self.kind
        if k == "zero":
            return np.zeros((0, 2))
        if k == "ray":
            return np.array([self.first])
        if k == "wedge":
            return np.array([self.first, self.last])
        if k == "halfplane":
            return np.array([self.first, self.last, _rot90(self.first)])
        if k == "line":
            return np.array([self.first, -self.first])
        return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])

    def polar(self) -> "PlanarCone":
        k = self.kind
        if k == "zero":
            return PlanarCone("plane")
        if k == "plane":
            return PlanarCone("zero")
        if k == "ray":
            g = self.first
            return PlanarCone("halfplane", _rot90(g), _rotm90(g))
        if k == "line":
            return PlanarCone("line", _rot90(self.first))
        if k == "halfplane":
            return PlanarCone("ray", _rotm90(self.first))
        return PlanarCone("wedge", _rot90(self.last), _rotm90(self.first))

    def contains(self, u, tol=RAY_TOL) -> bool:
        u = np.asarray(u, dtype=float)
        n = np.linalg.norm(u)
        if n == 0:
            return True
        pol = self.polar().generators()
        return bool(((pol @ u) <= tol * n).all())


def planar_cone(generators) -> PlanarCone:
    """Classify the conic hull of a finite set of planar vectors."""
    G = _as_rows(generators, 2)
    if G.shape[0]:
        G = G[np.linalg.norm(G, axis=1) > 0]
    if G.shape[0] == 0:
        return PlanarCone("zero")
    U = G / np.linalg.norm(G, axis=1)[:, None]
    ang = np.mod(np.arctan2(U[:, 1], U[:, 0]), TWO_PI)
    order = np.argsort(ang)
    ang, U = ang[order], U[order]
    # merge numerically identical directions
    keep = np.concatenate(([True], np.diff(ang) > ANGLE_TOL))
    if ang.size > 1 and ang[-1] - ang[0] > TWO_PI - ANGLE_TOL:
        keep[-1] = False
    ang, U = ang[keep], U[keep]
    if ang.size == 1:
        return PlanarCone("ray", U[0])
    gaps = np.diff(np.concatenate((ang, [ang[0] + TWO_PI])))
    i = int(np.argmax(gaps))
    gmax = gaps[i]
    start = U[(i + 1) % ang.size]
    end = U[i]
    if gmax > math.pi + ANGLE_TOL:
        return PlanarCone("wedge", start, end)
    if gmax >= math.pi - ANGLE_TOL:
        second = np.sort(gaps)[-2]
        if second >= math.pi - ANGLE_TOL:
            return PlanarCone("line", start)
        return PlanarCone("halfplane", start, -start)
    return PlanarCone("plane")


def polar_cone_2d(generators, strict=False) -> ConvexBody:
    """Polar of the planar cone generated by ``generators``.

    When the generators span the whole plane the polar is ``{0}``; it is
    returned as the origin body, or :class:`DegenerateError` is raised
    when ``strict`` is set.
    """
    cone = planar_cone(generators)
    if cone.kind == "plane" and strict:
        raise DegenerateError("generators span the plane; the polar cone is {0}")
    return cone_body_2d(cone.polar())


def cone_body_2d(cone: PlanarCone) -> ConvexBody:
    return ConvexBody.cone(cone.generators(), dim=2)


# ---------------------------------------------------------------------------
# planar half-space intersection


def _min_envelope(slopes, icepts):
    """Lower envelope ``min_i (s_i x + c_i)`` of lines.

    Returns the indices of lines on the envelope from left to right and
    the breakpoints between them.
    """
    order = np.lexsort((icepts, -slopes))
    hull = []
    for i in order:
        s, c = slopes[i], icepts[i]
        if hull and slopes[hull[-1]] == s:
            continue  # same slope, larger intercept
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            s1, c1 = slopes[i1], icepts[i1]
            s2, c2 = slopes[i2], icepts[i2]
            # drop l2 when l1 and l3 cross no later than l1 and l2
            if (c - c1) * (s1 - s2) <= (c2 - c1) * (s1 - s):
                hull.pop()
            else:
                break
        hull.append(i)
    hull = np.array(hull, dtype=int)
    s, c = slopes[hull], icepts[hull]
    bx = (c[1:] - c[:-1]) / (s[:-1] - s[1:])
    return hull, bx


class _Envelope:
    def __init__(self, slopes, icepts, sign):
        # sign = +1: y <= min(lines);  sign = -1: y >= max(lines)
        self.sign = sign
        hull, bx = _min_envelope(sign * slopes, sign * icepts)
        self.s = slopes[hull]
        self.c = icepts[hull]
        self.bx = bx

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.bx, x)
        return self.s[k] * x + self.c[k]

    @property
    def slope_left(self):
        return self.s[0]

    @property
    def slope_right(self):
        return self.s[-1]


def _merge_parallel(N, b):
    ang = np.mod(np.arctan2(N[:, 1], N[:, 0]), TWO_PI)
    order = np.lexsort((b, ang))
    ang, N, b = ang[order], N[order], b[order]
    groups = np.concatenate(([0], np.cumsum(np.diff(ang) > ANGLE_TOL)))
    if ang.size > 1 and ang[-1] - ang[0] > TWO_PI - ANGLE_TOL:
        groups[groups == groups[-1]] = 0
    keep = []
    for g in np.unique(groups):
        idx = np.flatnonzero(groups == g)
        keep.append(idx[np.argmin(b[idx])])
    keep = np.array(sorted(keep))
    return N[keep], b[keep], ang[keep]


def _rotation_angle(ang):
    t = np.sort(np.mod(ang, math.pi))
    gaps = np.diff(np.concatenate((t, [t[0] + math.pi])))
    i = int(np.argmax(gaps))
    return t[i] + gaps[i] / 2.0


class Region:
    """Convex set given by half-spaces, with an exact chain in the plane.

    Attributes
    ----------
    constraints : tuple of HalfSpace
        The defining half-spaces (whole-space ones removed).
    vertices : ndarray or None
        Counter-clockwise boundary vertices (2-D only).
    rays : ndarray or None
        Recession directions (2-D only); with ``vertices`` they give the
        region as ``conv(vertices) + cone(rays)``.
    empty : bool
    """

    __slots__ = ("constraints", "vertices", "rays", "empty", "dim", "_feasible")

    def __init__(self, constraints, vertices=None, rays=None, empty=False, dim=None):
        self.constraints = tuple(constraints)
        self.vertices = None if vertices is None else np.asarray(vertices, dtype=float)
        self.rays = None if rays is None else np.asarray(rays, dtype=float).reshape(-1, 2)
        self.empty = bool(empty)
        if dim is None:
            dim = len(self.constraints[0].normal) if self.constraints else 2
        self.dim = int(dim)
        self._feasible = None

    @property
    def normals(self) -> np.ndarray:
        return np.array([c.normal for c in self.constraints]).reshape(-1, self.dim)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([c.offset for c in self.constraints])

    @property
    def has_chain(self) -> bool:
        return self.vertices is not None

    def is_empty(self) -> bool:
        if self.empty:
            return True
        if self.vertices is not None:
            return False
        if self._feasible is None:
            A, b = _hrep_arrays(self.constraints, self.dim)
            self._feasible = A is not None and lp.hrep_feasible(A, b)
        return not self._feasible

    def support(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if self.is_empty():
            return NEG_INF
        if self.vertices is not None:
            return support(self.to_body(), w)
        return support_of_hrep(self.constraints, w)

    def support_many(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if self.is_empty():
            return np.full(W.shape[0], NEG_INF)
        if self.vertices is not None:
            return support_many(self.to_body(), W)
        return np.array([support_of_hrep(self.constraints, w) for w in W])

    def contains(self, x, tol=FEAS_TOL) -> bool:
        if self.is_empty():
            return False
        x = np.asarray(x, dtype=float)
        for c in self.constraints:
            if c.normal @ x > c.offset + tol * (1.0 + abs(c.offset)):
                return False
        return True

    def to_body(self) -> ConvexBody:
        if self.is_empty():
            return ConvexBody.empty(self.dim)
        if self.vertices is None:
            return ConvexBody(None, hrep=self.constraints, dim=self.dim)
        return ConvexBody(self.vertices, self.rays, hrep=self.constraints)

    def __repr__(self):
        if self.empty:
            return "Region(empty)"
        if self.vertices is not None:
            return (f"Region({len(self.constraints)} constraints, "
                    f"vertices={self.vertices.tolist()}, rays={self.rays.tolist()})")
        return f"Region({len(self.constraints)} constraints, dim={self.dim})"


def _dedupe_cyclic(P, scale):
    if P.shape[0] <= 1:
        return P
    tol = 1e-12 * scale
    out = [P[0]]
    for p in P[1:]:
        if np.abs(p - out[-1]).max() > tol:
            out.append(p)
    if len(out) > 1 and np.abs(out[-1] - out[0]).max() <= tol:
        out.pop()
    return np.array(out)


def _polish_vertices(P, N, b, scale, ftol):
    """Recompute each vertex from two of its tight constraints.

    Removes the rounding picked up by the rotated frame.  Among the nearly
    tight constraints the best conditioned pair is used, and a vertex is
    only replaced when the solve moves it by less than ``1e-9`` relative.
    """
    out = P.copy()
    for k, p in enumerate(P):
        slack = np.abs(N @ p - b)
        order = np.argsort(slack, kind="stable")[:4]
        tight = [i for i in order if slack[i] <= 1e-9 * scale]
        best, pair = 1e-6, None
        for a in range(len(tight)):
            for c in range(a + 1, len(tight)):
                i, j = tight[a], tight[c]
                det = abs(N[i, 0] * N[j, 1] - N[i, 1] * N[j, 0])
                if det > best:
                    best, pair = det, (i, j)
        if pair is not None:
            i, j = pair
            q = np.linalg.solve(np.array([N[i], N[j]]), np.array([b[i], b[j]]))
            if np.abs(q - p).max() <= 1e-9 * scale and (N @ q - b).max() <= ftol:
                out[k] = q
    return out


def intersect_halfspaces_2d(constraints: Sequence[HalfSpace], tol=FEAS_TOL) -> Region:
    """Exact intersection of planar half-spaces.

    Normals are normalised and parallel ones merged (keeping the tighter
    offset).  The frame is rotated so that no boundary line is vertical;
    every constraint then reads ``y <= line(x)`` or ``y >= line(x)``, the
    region lies between a concave upper envelope ``U`` and a convex lower
    envelope ``L``, and its x-extent is where ``U - L >= 0``.  Feasibility
    is decided with tolerance ``tol`` relative to the offsets, so regions
    that are a single point or segment up to rounding are kept.
    """
    cons = tuple(c for c in constraints if not c.is_whole_space)
    for c in cons:
        if c.normal.size != 2:
            raise DomainError("intersect_halfspaces_2d needs planar half-spaces")
    if any(c.is_empty for c in cons):
        return Region(cons, empty=True, dim=2)
    if not cons:
        return Region(cons, np.zeros((1, 2)), PlanarCone("plane").generators(), dim=2)

    A = np.array([c.normal for c in cons])
    b = np.array([c.offset for c in cons])
    norms = np.linalg.norm(A, axis=1)
    N = A / norms[:, None]
    b = b / norms
    N, b, ang = _merge_parallel(N, b)
    scale = 1.0 + np.abs(b).max()
    ftol = tol * scale

    phi = _rotation_angle(ang)
    cp, sp = math.cos(phi), math.sin(phi)
    # rotate by -phi so that no rotated normal is horizontal
    Rm = np.array([[cp, sp], [-sp, cp]])
    Nr = N @ Rm.T
    up = Nr[:, 1] > 0
    lo = ~up
    slopes = -Nr[:, 0] / Nr[:, 1]
    icepts = b / Nr[:, 1]
    U = _Envelope(slopes[up], icepts[up], +1) if up.any() else None
    L = _Envelope(slopes[lo], icepts[lo], -1) if lo.any() else None

    xl, xr = NEG_INF, POS_INF
    if U is not None and L is not None:
        X = np.unique(np.concatenate((U.bx, L.bx)))
        if X.size == 0:
            X = np.zeros(1)
        H = U(X) - L(X)
        sig_r = U.slope_right - L.slope_right
        sig_l = U.slope_left - L.slope_left
        if sig_r > 0 or sig_l < 0:
            hmax = POS_INF
        else:
            hmax = H.max()
        if hmax < -ftol:
            return Region(cons, empty=True, dim=2)
        theta = min(0.0, hmax)
        if sig_r > 0:
            peak = X.size - 1
        elif sig_l < 0:
            peak = 0
        else:
            peak = int(np.argmax(H))

        # right end
        if sig_r > 0 or (sig_r == 0 and H[-1] >= theta):
            xr = POS_INF
        elif H[peak] < theta:
            xr = X[peak] + (theta - H[peak]) / sig_l  # peak beyond the left end
        else:
            j = peak + 1
            while j < X.size and H[j] >= theta:
                j += 1
            if j < X.size:
                xr = X[j - 1] + (H[j - 1] - theta) / (H[j - 1] - H[j]) * (X[j] - X[j - 1])
            else:
                xr = X[-1] + (theta - H[-1]) / sig_r
        # left end
        if sig_l < 0 or (sig_l == 0 and H[0] >= theta):
            xl = NEG_INF
        elif H[peak] < theta:
            xl = X[peak] + (theta - H[peak]) / sig_r  # peak beyond the right end
        else:
            j = peak - 1
            while j >= 0 and H[j] >= theta:
                j -= 1
            if j >= 0:
                xl = X[j + 1] - (H[j + 1] - theta) / (H[j + 1] - H[j]) * (X[j + 1] - X[j])
            else:
                xl = X[0] + (theta - H[0]) / sig_l
        if xl > xr:
            xl = xr = 0.5 * (xl + xr)

    def chain_x(env):
        xs = [x for x in env.bx if xl < x < xr]
        if math.isfinite(xl):
            xs.insert(0, xl)
        if math.isfinite(xr):
            xs.append(xr)
        if not xs:
            xs = [0.0]
        return np.array(xs)

    pts = []
    if L is not None:
        xs = chain_x(L)
        pts.append(np.column_stack((xs, L(xs))))
    if U is not None:
        xs = chain_x(U)[::-1]
        pts.append(np.column_stack((xs, U(xs))))
    P = np.vstack(pts)

    rays = []
    if xr == POS_INF:
        rays.append((1.0, L.slope_right) if L is not None else (0.0, -1.0))
        rays.append((1.0, U.slope_right) if U is not None else (0.0, 1.0))
    if xl == NEG_INF:
        rays.append((-1.0, -U.slope_left) if U is not None else (0.0, 1.0))
        rays.append((-1.0, -L.slope_left) if L is not None else (0.0, -1.0))
    Rr = np.array(rays).reshape(-1, 2)
    if Rr.shape[0]:
        Rr = Rr / np.linalg.norm(Rr, axis=1)[:, None]
        uniq = []
        for r in Rr:
            if all(r @ q < 1.0 - 1e-15 for q in uniq):
                uniq.append(r)
        Rr = np.array(uniq)

    # back to the original frame
    P = P @ Rm
    if Rr.shape[0]:
        # minimal generators of the recession cone
        Rr = planar_cone(Rr @ Rm).generators()
    pscale = max(1.0, np.abs(P).max())
    P = _polish_vertices(P, N, b, pscale, ftol)
    P[np.abs(P) < 1e-15 * pscale] = 0.0
    if Rr.shape[0]:
        Rr[np.abs(Rr) < 1e-15] = 0.0
    P = _dedupe_cyclic(P, pscale)
    return Region(cons, P, Rr.reshape(-1, 2), dim=2)


def region_from_hrep(constraints, dim=None) -> Region:
    cons = tuple(constraints)
    d = dim if dim is not None else (len(cons[0].normal) if cons else 2)
    if d == 2:
        return intersect_halfspaces_2d(cons)
    return Region([c for c in cons if not c.is_whole_space], dim=d)


# ---------------------------------------------------------------------------
# planar facets and hulls


def convex_hull_2d(P) -> np.ndarray:
    """Counter-clockwise hull of planar points (monotone chain)."""
    P = np.unique(np.asarray(P, dtype=float).reshape(-1, 2), axis=0)
    if P.shape[0] <= 2:
        return P

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in P:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in P[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hrep_2d(body: ConvexBody):
    """Half-space description of a planar ``conv(V) + cone(R)``.

    Facet normals of the sum are the facet normals of ``conv(V)`` lying in
    the polar of the recession cone, together with the generators of that
    polar.
    """
    if body.is_empty:
        return [HalfSpace([0.0, 0.0], NEG_INF)]
    if body.vertices is None:
        return list(body._hrep)
    V = body.vertices
    rec = planar_cone(body.rays)
    pol = rec.polar()
    if pol.kind == "zero":
        return []
    cand = [] if pol.kind == "plane" else list(pol.generators())
    hull = convex_hull_2d(V)
    if hull.shape[0] >= 3:
        edges = np.roll(hull, -1, axis=0) - hull
        cand.extend(_rotm90(e) for e in edges)
    elif hull.shape[0] == 2:
        e = hull[1] - hull[0]
        cand.extend([_rot90(e), _rotm90(e), e, -e])
    else:
        cand.extend(np.vstack([np.eye(2), -np.eye(2)]))
    out = []
    seen = []
    for n in cand:
        n = _unit(n)
        if pol.kind != "plane" and not pol.contains(n, tol=1e-12):
            continue
        if any(n @ m > 1.0 - 1e-14 for m in seen):
            continue
        seen.append(n)
        out.append(HalfSpace(n, float((V @ n).max())))
    return out


def canonical_2d(body: ConvexBody) -> ConvexBody:
    """Planar body with redundant vertices and rays removed."""
    if body.is_empty or body.dim != 2:
        return body
    reg = intersect_halfspaces_2d(hrep_2d(body))
    return ConvexBody(reg.vertices, reg.rays, hrep=reg.constraints, is_cone=body.is_cone)


# ---------------------------------------------------------------------------
# polar sets, sums and images


def contains_origin(body: ConvexBody, tol=1e-9) -> bool:
    if body.is_empty:
        return False
    if body.vertices is None:
        return all(c.offset >= -tol for c in body._hrep)
    if body.is_cone:
        return True
    V, R = body.vertices, body.rays
    k, r, d = V.shape[0], R.shape[0], body.dim
    # lambda >= 0, mu >= 0, sum(lambda) = 1, V^T lambda + R^T mu = 0
    M = np.zeros((d + 1, k + r))
    M[:d, :k] = V.T
    M[:d, k:] = R.T
    M[d, :k] = 1.0
    rhs = np.zeros(d + 1)
    rhs[d] = 1.0
    return lp.linprog_std(np.zeros(k + r), M, rhs).status == "optimal"


def polar_set(body: ConvexBody) -> ConvexBody:
    """``{u : <u, x> <= 1 for all x in body}`` for bodies containing 0."""
    if not contains_origin(body):
        raise PreconditionError("the polar set needs the origin inside the body")
    d = body.dim
    if body.vertices is None:
        # polar of {x : A x <= b} with b >= 0
        pts, rays = [np.zeros(d)], []
        for c in body._hrep:
            if c.is_whole_space:
                continue
            if c.offset > 0:
                pts.append(c.normal / c.offset)
            else:
                rays.append(c.normal)
        return ConvexBody(pts, rays)
    cons = []
    if body.is_cone:
        for g in body.rays:
            cons.append(HalfSpace(g, 0.0))
    else:
        for v in body.vertices:
            if np.abs(v).max() > 0:
                cons.append(HalfSpace(v, 1.0))
        for r in body.rays:
            cons.append(HalfSpace(r, 0.0))
    if d == 2:
        reg = intersect_halfspaces_2d(cons)
        return ConvexBody(reg.vertices, reg.rays, hrep=reg.constraints, is_cone=body.is_cone)
    if not cons:
        return ConvexBody.whole_space(d)
    return ConvexBody(None, hrep=cons, dim=d, is_cone=body.is_cone)


def minkowski_sum(a: ConvexBody, b: ConvexBody) -> ConvexBody:
    """``a + b``; vertices are pairwise sums, rays are concatenated."""
    if a.is_empty or b.is_empty:
        raise PreconditionError("Minkowski sum needs nonempty bodies")
    if a.vertices is None or b.vertices is None:
        raise PreconditionError("Minkowski sum needs vertex descriptions")
    V = (a.vertices[:, None, :] + b.vertices[None, :, :]).reshape(-1, a.dim)
    R = np.vstack([a.rays, b.rays])
    V = prune_vertices(V)
    return ConvexBody(V, R, is_cone=a.is_cone and b.is_cone)


def prune_vertices(V) -> np.ndarray:
    """Drop points that are not extreme in their convex hull."""
    V = np.asarray(V, dtype=float)
    if V.shape[0] <= 1:
        return V
    d = V.shape[1]
    if d == 2:
        return convex_hull_2d(V)
    V = np.unique(V, axis=0)
    if V.shape[0] <= d + 1:
        return V
    try:
        from scipy.spatial import ConvexHull
        from scipy.spatial import QhullError
    except ImportError:  # pragma: no cover
        return V
    try:
        return V[ConvexHull(V).vertices]
    except (QhullError, ValueError):
        return V


def linear_image(body: ConvexBody, gamma) -> ConvexBody:
    """Image of ``body`` under an invertible matrix."""
    G = np.asarray(gamma, dtype=float)
    d = body.dim
    if G.shape != (d, d):
        raise DomainError(f"matrix must be {d}x{d}")
    if abs(np.linalg.det(G)) < 1e-14 or np.linalg.cond(G) > 1e12:
        raise SingularMatrixError("linear image needs an invertible matrix")
    if body.is_empty:
        return body
    Ginv_t = np.linalg.inv(G).T
    hrep = None
    if body._hrep is not None:
        hrep = [HalfSpace(Ginv_t @ c.normal, c.offset) for c in body._hrep]
    if body.vertices is None:
        return ConvexBody(None, hrep=hrep, dim=d, is_cone=body.is_cone)
    return ConvexBody(body.vertices @ G.T, body.rays @ G.T, hrep=hrep, is_cone=body.is_cone)


def translate(body: ConvexBody, z) -> ConvexBody:
    z = np.asarray(z, dtype=float)
    if body.is_empty:
        return body
    hrep = None
    if body._hrep is not None:
        hrep = [HalfSpace(c.normal, c.offset + c.normal @ z) for c in body._hrep]
    if body.vertices is None:
        return ConvexBody(None, hrep=hrep, dim=body.dim)
    return ConvexBody(body.vertices + z, body.rays, hrep=hrep)


# ---------------------------------------------------------------------------
# direction grids


def direction_grid(d: int, n: int, scheme: str = "uniform2d", seed: int = 0) -> np.ndarray:
    """Unit directions used to approximate a dense set on the sphere.

    ``uniform2d`` is the angular lattice ``2 pi k / n``; ``fibonacci`` a
    spherical Fibonacci lattice; ``random`` normalised Gaussian draws
    reproducible from ``seed``.  The coordinate axes ``+-e_i`` are always
    present (appended to the lattice when ``n`` is not a multiple of 4).
    """
    if n < 4:
        raise DomainError("a direction grid needs at least 4 directions")
    eye = np.eye(d)
    axes = np.vstack([eye, -eye])
    if scheme == "uniform2d":
        if d != 2:
            raise DomainError("uniform2d grids are planar")
        k = np.arange(n)
        t = (TWO_PI * k) / n
        W = np.column_stack((np.cos(t), np.sin(t)))
        quarter = (4 * k) % n == 0
        for i in np.flatnonzero(quarter):
            q = (4 * k[i]) // n
            W[i] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][q]
        if n % 4:
            W = np.vstack([W, [a for a in axes if not (np.abs(W - a).max(axis=1) == 0).any()]])
        return W
    if scheme == "fibonacci":
        m = n - 2 * d
        if d == 2:
            t = TWO_PI * (np.arange(m) + 0.5) / m
            W = np.column_stack((np.cos(t), np.sin(t)))
        elif d == 3:
            i = np.arange(m) + 0.5
            z = 1.0 - 2.0 * i / m
            r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
            golden = math.pi * (3.0 - math.sqrt(5.0))
            t = golden * i
            W = np.column_stack((r * np.cos(t), r * np.sin(t), z))
        else:
            raise DomainError("fibonacci grids are defined for d = 2, 3")
        return np.vstack([axes, W])
    if scheme == "random":
        rng = np.random.Generator(np.random.Philox(seed))
        W = rng.standard_normal((max(n - 2 * d, 0), d))
        W /= np.linalg.norm(W, axis=1)[:, None]
        return np.vstack([axes, W])
    raise DomainError(f"unknown grid scheme {scheme!r}")


def default_grid(d: int) -> np.ndarray:
    if d == 2:
        return direction_grid(2, 720, "uniform2d")
    return direction_grid(d, 2048 if d == 3 else 512 * d, "fibonacci" if d == 3 else "random")
