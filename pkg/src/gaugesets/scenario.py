"""Finite-scenario models of random closed convex sets.

A :class:`RandomSetModel` is a list of ``(probability, body, atom)``
scenarios.  Conditioning is on the sigma-algebra generated by a finite
:class:`Partition` of the scenarios; the conditional law on an atom is the
scenario law restricted to the atom and renormalised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import DomainError, FormatError, UnknownAtomError
from .geometry import ConvexBody, linear_image, minkowski_sum, support_many, translate
from .scalar import WeightedSample

log = logging.getLogger(__name__)

PROB_TOL = 1e-9
DEFAULT_ATOM = "all"
# directions projected per block when scalarising large point models
_BLOCK = 64


@dataclass(frozen=True)
class Scenario:
    prob: float
    body: ConvexBody
    atom: str = DEFAULT_ATOM

    def __post_init__(self):
        if not self.prob >= 0:
            raise DomainError("scenario probability must be non-negative")
        if self.body.is_empty:
            raise DomainError("scenario bodies must be nonempty")


class RandomSetModel:
    """Random closed convex set with finitely many scenarios.

    Scenarios of probability zero are dropped.  Probabilities must sum to
    one within ``1e-9``.
    """

    def __init__(self, scenarios: Sequence[Scenario]):
        self._scenarios = None
        scen = tuple(s for s in scenarios if s.prob > 0)
        if not scen:
            raise DomainError("a model needs at least one scenario of positive probability")
        total = math.fsum(s.prob for s in scen)
        if abs(total - 1.0) > PROB_TOL:
            raise DomainError(f"scenario probabilities sum to {total!r}, not 1")
        dims = {s.body.dim for s in scen}
        if len(dims) != 1:
            raise DomainError(f"scenario bodies live in different dimensions {sorted(dims)}")
        self._scenarios = scen
        self.dim = dims.pop()
        self.probs = np.array([s.prob for s in scen]) / total
        self.atoms = tuple(s.atom for s in scen)
        self._points = None
        if all(s.body.vertices is not None and s.body.vertices.shape[0] == 1
               and s.body.rays.shape[0] == 0 for s in scen):
            self._points = np.vstack([s.body.vertices for s in scen])
        self.uniform = bool(np.all(self.probs == self.probs[0]))

    @classmethod
    def from_points(cls, points, probs=None, atoms=None) -> "RandomSetModel":
        """Singleton model; scenario objects are only built on demand."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        n = X.shape[0]
        if n == 0:
            raise DomainError("a model needs at least one scenario of positive probability")
        if not np.isfinite(X).all():
            raise DomainError("points must be finite")
        p = np.full(n, 1.0 / n) if probs is None else np.asarray(probs, dtype=float).ravel()
        if p.shape != (n,) or not np.isfinite(p).all() or (p < 0).any():
            raise DomainError("one non-negative probability per point is required")
        labels = [DEFAULT_ATOM] * n if atoms is None else [str(a) for a in atoms]
        if len(labels) != n:
            raise DomainError("one atom label per point is required")
        keep = p > 0
        if not keep.any():
            raise DomainError("a model needs at least one scenario of positive probability")
        total = math.fsum(p[keep])
        if abs(total - 1.0) > PROB_TOL:
            raise DomainError(f"scenario probabilities sum to {total!r}, not 1")
        obj = cls.__new__(cls)
        obj._scenarios = None
        obj._points = X[keep]
        obj.dim = X.shape[1]
        obj.probs = p[keep] / total
        obj.atoms = tuple(a for a, k in zip(labels, keep) if k)
        obj.uniform = bool(np.all(obj.probs == obj.probs[0]))
        return obj

    @property
    def scenarios(self):
        if self._scenarios is None:
            self._scenarios = tuple(Scenario(float(pi), ConvexBody.point(x), a)
                                    for pi, x, a in zip(self.probs, self._points, self.atoms))
        return self._scenarios

    @classmethod
    def deterministic(cls, body: ConvexBody) -> "RandomSetModel":
        return cls([Scenario(1.0, body)])

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        return f"RandomSetModel({len(self)} scenarios, dim={self.dim})"

    @property
    def points(self) -> Optional[np.ndarray]:
        """Scenario points when every scenario is a singleton, else None."""
        return self._points

    @property
    def is_singleton(self) -> bool:
        return self._points is not None

    @property
    def bodies(self):
        return [s.body for s in self.scenarios]

    def partition(self) -> "Partition":
        """Partition induced by the scenario atom labels."""
        return Partition.from_labels(self.atoms, self.probs)

    def restrict(self, indices, weights) -> "RandomSetModel":
        """Model on a subset of scenarios with the given (conditional) weights."""
        if self._points is not None:
            idx = np.asarray(indices, dtype=int)
            return RandomSetModel.from_points(self._points[idx], weights,
                                              [self.atoms[i] for i in idx])
        return RandomSetModel([Scenario(float(w), self.scenarios[i].body, self.scenarios[i].atom)
                               for i, w in zip(indices, weights)])

    def map_bodies(self, fn) -> "RandomSetModel":
        return RandomSetModel([Scenario(s.prob, fn(s.body), s.atom) for s in self.scenarios])

    def translate(self, z) -> "RandomSetModel":
        return self.map_bodies(lambda b: translate(b, z))

    def linear_image(self, gamma) -> "RandomSetModel":
        return self.map_bodies(lambda b: linear_image(b, gamma))

    def add_cone(self, cone: ConvexBody) -> "RandomSetModel":
        """Scenario-wise Minkowski sum with a deterministic body."""
        return self.map_bodies(lambda b: minkowski_sum(b, cone))

    def support_table(self, W) -> np.ndarray:
        """Support values, one row per scenario and one column per direction."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if self._points is not None:
            return (W @ self._points.T).T
        return np.vstack([support_many(b, W) for b in self.bodies])


def independent_sum(a: RandomSetModel, b: RandomSetModel) -> RandomSetModel:
    """Law of ``X' + X''`` for independent models (scenario product)."""
    out = []
    for sa in a.scenarios:
        for sb in b.scenarios:
            out.append(Scenario(sa.prob * sb.prob, minkowski_sum(sa.body, sb.body),
                                f"{sa.atom}|{sb.atom}"))
    return RandomSetModel(out)


@dataclass(frozen=True)
class Atom:
    indices: np.ndarray
    weights: np.ndarray
    prob: float


class Partition:
    """Finite partition of the scenario indices.

    Each atom stores its scenario indices, the conditional weights within
    the atom (summing to one) and its total probability.
    """

    def __init__(self, atoms: Dict[str, Atom], size: int):
        seen = np.concatenate([a.indices for a in atoms.values()]) if atoms else np.zeros(0, int)
        if sorted(seen.tolist()) != list(range(size)):
            raise DomainError("partition atoms must cover every scenario exactly once")
        for label, a in atoms.items():
            if abs(a.weights.sum() - 1.0) > PROB_TOL:
                raise DomainError(f"conditional weights of atom {label!r} do not sum to 1")
        self.atoms = dict(atoms)
        self.size = size

    @classmethod
    def from_labels(cls, labels, probs) -> "Partition":
        probs = np.asarray(probs, dtype=float)
        atoms = {}
        groups = {}
        for i, label in enumerate(labels):
            groups.setdefault(label, []).append(i)
        for label, members in groups.items():
            idx = np.array(members)
            p = probs[idx]
            tot = p.sum()
            atoms[label] = Atom(idx, p / tot, float(tot))
        return cls(atoms, len(labels))

    @classmethod
    def trivial(cls, model: RandomSetModel) -> "Partition":
        return cls.from_labels([DEFAULT_ATOM] * len(model), model.probs)

    @property
    def labels(self):
        return list(self.atoms)

    def __getitem__(self, label) -> Atom:
        try:
            return self.atoms[label]
        except KeyError:
            raise UnknownAtomError(f"unknown atom {label!r}") from None

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"Partition({', '.join(f'{k}:{len(a.indices)}' for k, a in self.atoms.items())})"


def _sample(values, probs, uniform) -> WeightedSample:
    return WeightedSample(values, None if uniform else probs)


def scalarize(model: RandomSetModel, w) -> WeightedSample:
    """Law of the support function ``h(X, w)``."""
    w = np.asarray(w, dtype=float)
    vals = model.support_table(w[None, :])[:, 0]
    return _sample(vals, model.probs, model.uniform)


def conditional_scalarize(model: RandomSetModel, partition: Partition, atom, w) -> WeightedSample:
    """Conditional law of ``h(X, w)`` on one atom of the partition."""
    a = partition[atom]
    w = np.asarray(w, dtype=float)
    sub = model.restrict(a.indices, a.weights)
    return scalarize(sub, w)


def scalarize_many(model: RandomSetModel, W):
    """Yield ``(j, sample)`` for every direction row ``W[j]``.

    Point models are projected in blocks, so the full scenario-by-direction
    table is never materialised.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    for start in range(0, W.shape[0], _BLOCK):
        # rows of the transposed table are contiguous per direction
        block = np.ascontiguousarray(model.support_table(W[start:start + _BLOCK]).T)
        for k in range(block.shape[0]):
            yield start + k, _sample(block[k], model.probs, model.uniform)


def barrier_probability(model: RandomSetModel, w) -> float:
    """Probability that ``w`` lies in the barrier cone of the random set."""
    vals = model.support_table(np.asarray(w, dtype=float)[None, :])[:, 0]
    return float(model.probs[np.isfinite(vals)].sum())


def from_point_samples(rows, weights=None, atoms=None):
    """Singleton model and partition from tabular point data.

    ``weights`` not summing to one are renormalised with a warning;
    ``atoms`` gives one label per row (trivial partition when omitted).
    """
    rows = list(rows)
    if not rows:
        raise FormatError("no data rows")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise FormatError(f"ragged rows with lengths {sorted(lengths)}")
    try:
        X = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric point coordinate: {exc}") from None
    n = X.shape[0]
    if weights is None:
        p = np.full(n, 1.0 / n)
    else:
        p = np.asarray(weights, dtype=float)
        if p.shape != (n,) or (p < 0).any() or not np.isfinite(p).all() or p.sum() <= 0:
            raise FormatError("weights must be one non-negative number per row")
        tot = p.sum()
        if abs(tot - 1.0) > PROB_TOL:
            log.warning("point weights sum to %r; renormalising", float(tot))
        p = p / tot
    labels = [DEFAULT_ATOM] * n if atoms is None else [str(a) for a in atoms]
    if len(labels) != n:
        raise FormatError("atom column length differs from the number of rows")
    if not np.isfinite(X).all():
        raise FormatError("point coordinates must be finite")
    model = RandomSetModel.from_points(X, p, labels)
    return model, model.partition()


def bin_labels(covariate, bins: int = 10):
    """Equal-frequency bin labels for a real covariate (ties share a bin)."""
    x = np.asarray(covariate, dtype=float)
    if bins < 1:
        raise DomainError("need at least one bin")
    edges = np.quantile(x, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    idx = np.searchsorted(edges, x, side="right")
    return [f"bin{int(i)}" for i in idx]
