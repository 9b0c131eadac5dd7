"""Scalar gauge functions on finite weighted samples of extended reals.

A :class:`WeightedSample` is a finite discrete law on ``(-inf, +inf]``.
Values are stored sorted and tie-merged, so every cumulative-weight scan
below works on a strictly increasing support.

Supported gauges (see :class:`GaugeSpec`): lower/upper quantiles,
essential infimum/supremum, expectation, right/left average quantiles,
expectiles, the Lp-norm gauge ``E X + a (E (X - E X)_+^p)^(1/p)``,
duals ``-g(-X)`` and the max/min extensions over i.i.d. copies.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, GaugeSpecError

NEG_INF = -math.inf
POS_INF = math.inf

WEIGHT_TOL = 1e-9
# slack used when comparing cumulative weights with a probability level
LEVEL_EPS = 1e-12
MAX_NESTING = 8


def ext_add(a: float, b: float) -> float:
    """Add two extended reals, refusing ``inf - inf``."""
    if (a == POS_INF and b == NEG_INF) or (a == NEG_INF and b == POS_INF):
        raise DomainError("inf - inf is undefined on the extended real line")
    return a + b


def ext_mul(c: float, a: float) -> float:
    """Multiply an extended real by a finite scalar; ``0 * inf`` is 0."""
    if c == 0.0:
        return 0.0
    return c * a


class WeightedSample:
    """Finite discrete distribution on ``(-inf, +inf]``.

    Parameters
    ----------
    values : array_like
        Support points; ``+inf`` is allowed, ``-inf`` and NaN are not.
    weights : array_like, optional
        Probabilities, equal weights when omitted.  The sum must be within
        ``1e-9`` of one; weights are renormalised once here.
    """

    __slots__ = ("values", "weights", "_cum")

    def __init__(self, values, weights=None):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("a weighted sample needs at least one value")
        if np.isnan(v).any():
            raise DomainError("NaN is not an extended real")
        if (v == NEG_INF).any():
            raise DomainError("-inf values are outside the sample domain")
        if weights is None:
            # equal weights: counts give the distribution function exactly
            n = v.size
            v = np.sort(v)
            if n > 1:
                new = np.empty(n, dtype=bool)
                new[0] = True
                np.not_equal(v[1:], v[:-1], out=new[1:])
                if new.all():
                    ends = np.arange(1, n + 1)
                else:
                    starts = np.flatnonzero(new)
                    ends = np.append(starts[1:], n)
                    v = v[starts]
            else:
                ends = np.ones(1, dtype=np.int64)
            self.values = v
            self._cum = ends / n
            self.weights = np.diff(ends, prepend=0) / n
            return
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != v.shape:
                raise DomainError("values and weights differ in length")
            if not np.isfinite(w).all() or (w < 0).any():
                raise DomainError("weights must be finite and non-negative")
            total = w.sum()
            if abs(total - 1.0) > WEIGHT_TOL:
                raise DomainError(f"weights sum to {total!r}, not 1")
            w = w / total
            order = np.argsort(v, kind="stable")
            v = v[order]
            w = w[order]
        keep = w > 0
        if not keep.all():
            v, w = v[keep], w[keep]
        if v.size > 1:
            new = np.empty(v.size, dtype=bool)
            new[0] = True
            np.not_equal(v[1:], v[:-1], out=new[1:])
            if not new.all():
                starts = np.flatnonzero(new)
                w = np.add.reduceat(w, starts)
                v = v[starts]
        self.values = v
        self.weights = w
        self._cum = None

    @classmethod
    def _trusted(cls, values, weights):
        # values already sorted, distinct, weights positive and normalised
        obj = cls.__new__(cls)
        obj.values = values
        obj.weights = weights
        obj._cum = None
        return obj

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"WeightedSample(values={self.values!r}, weights={self.weights!r})"

    @property
    def cumulative(self) -> np.ndarray:
        """Distribution function evaluated at the support points."""
        if self._cum is None:
            c = np.cumsum(self.weights)
            c[-1] = 1.0
            self._cum = c
        return self._cum

    @property
    def inf_mass(self) -> float:
        if self.values[-1] == POS_INF:
            return float(self.weights[-1])
        return 0.0

    @property
    def has_inf(self) -> bool:
        return self.values[-1] == POS_INF

    def finite_part(self):
        """Support points and weights excluding any mass at ``+inf``."""
        if self.has_inf:
            return self.values[:-1], self.weights[:-1]
        return self.values, self.weights

    def mean(self) -> float:
        if self.has_inf:
            return POS_INF
        return float(np.dot(self.weights, self.values))

    def __neg__(self):
        if self.has_inf:
            raise DomainError("negating a sample with mass at +inf leaves the domain")
        return WeightedSample._trusted(-self.values[::-1], self.weights[::-1].copy())

    def scale(self, c: float) -> "WeightedSample":
        """Law of ``c X`` for ``c > 0``."""
        if not c > 0:
            raise DomainError("scale factor must be positive")
        return WeightedSample._trusted(self.values * c, self.weights)

    def shift(self, c: float) -> "WeightedSample":
        """Law of ``X + c`` for finite ``c``."""
        if not math.isfinite(c):
            raise DomainError("shift must be finite")
        return WeightedSample(self.values + c, self.weights)


def point_mass(c: float) -> WeightedSample:
    return WeightedSample([c])


# ---------------------------------------------------------------------------
# elementary gauges


def quantile_lower(s: WeightedSample, alpha: float) -> float:
    """``inf{t : F(t) >= alpha}`` for ``alpha`` in (0, 1]."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"lower quantile level {alpha} not in (0, 1]")
    idx = int(np.searchsorted(s.cumulative, alpha - LEVEL_EPS, side="left"))
    return float(s.values[min(idx, len(s) - 1)])


def quantile_upper(s: WeightedSample, alpha: float) -> float:
    """``inf{t : F(t) > alpha}`` for ``alpha`` in [0, 1)."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"upper quantile level {alpha} not in [0, 1)")
    idx = int(np.searchsorted(s.cumulative, alpha + LEVEL_EPS, side="right"))
    return float(s.values[min(idx, len(s) - 1)])


def essinf(s: WeightedSample) -> float:
    return float(s.values[0])


def esssup(s: WeightedSample) -> float:
    return float(s.values[-1])


def avg_quantile_right(s: WeightedSample, alpha: float) -> float:
    """Average of the lower quantile function over ``(alpha, 1]``.

    The atom straddling ``alpha`` enters with the fraction of its weight
    lying above the level, which integrates the step quantile function
    exactly.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"right-average level {alpha} not in [0, 1)")
    if s.has_inf:
        return POS_INF
    w = s.weights
    part = np.minimum(w, np.maximum(0.0, s.cumulative - alpha))
    return float(np.dot(part, s.values) / (1.0 - alpha))


def avg_quantile_left(s: WeightedSample, alpha: float) -> float:
    """Average of the lower quantile function over ``(0, alpha]``."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"left-average level {alpha} not in (0, 1]")
    w = s.weights
    below = s.cumulative - w
    part = np.minimum(w, np.maximum(0.0, alpha - below))
    if s.has_inf and part[-1] > 0:
        return POS_INF
    v = s.values
    if s.has_inf:
        v, part = v[:-1], part[:-1]
    return float(np.dot(part, v) / alpha)


def expectile(s: WeightedSample, tau: float) -> float:
    """Root of ``tau E(X-z)_+ = (1-tau) E(X-z)_-``.

    The defining function is continuous, piecewise linear and strictly
    decreasing in ``z``.  A binary search over the support points brackets
    the root between two consecutive atoms; on that bracket the equation
    is linear and is solved in closed form.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"expectile level {tau} not in (0, 1)")
    if s.has_inf:
        return POS_INF
    if tau == 0.5:
        return s.mean()
    v, w = s.values, s.weights
    if v.size == 1:
        return float(v[0])
    wv = w * v
    s_lo = np.cumsum(wv)
    w_lo = s.cumulative
    s_tot = s_lo[-1]
    # residual at each support point, decreasing in the index
    resid = tau * ((s_tot - s_lo) - v * (1.0 - w_lo)) - (1.0 - tau) * (v * w_lo - s_lo)
    # first index whose residual is <= 0; the root sits in [v[j-1], v[j]]
    j = int(np.searchsorted(-resid, 0.0, side="left"))
    j = min(max(j, 1), v.size - 1)
    if resid[j - 1] == 0.0:
        return float(v[j - 1])
    num = tau * (s_tot - s_lo[j - 1]) + (1.0 - tau) * s_lo[j - 1]
    den = tau * (1.0 - w_lo[j - 1]) + (1.0 - tau) * w_lo[j - 1]
    z = num / den
    return float(min(max(z, v[j - 1]), v[j]))


def expectile_residual(s: WeightedSample, tau: float, z: float) -> float:
    """``tau E(X-z)_+ - (1-tau) E(X-z)_-`` evaluated directly."""
    d = s.values - z
    return float(tau * np.dot(s.weights, np.maximum(d, 0.0))
                 - (1.0 - tau) * np.dot(s.weights, np.maximum(-d, 0.0)))


def norm_gauge(s: WeightedSample, p: float, a: float) -> float:
    """``E X + a (E (X - E X)_+^p)^(1/p)``; ``+inf`` under mass at infinity."""
    if not p >= 1.0 or not math.isfinite(p):
        raise DomainError("norm gauge needs a finite p >= 1")
    if not 0.0 <= a <= 1.0:
        raise DomainError("norm gauge weight a must lie in [0, 1]")
    if s.has_inf:
        return POS_INF
    m = float(np.dot(s.weights, s.values))
    if a == 0.0:
        return m
    dev = np.maximum(s.values - m, 0.0)
    return m + a * float(np.dot(s.weights, dev ** p)) ** (1.0 / p)


def iid_extension(s: WeightedSample, m: int, mode: str = "max") -> WeightedSample:
    """Law of the maximum (or minimum) of ``m`` i.i.d. copies."""
    if int(m) != m or m < 1:
        raise DomainError("extension order must be a positive integer")
    if m == 1:
        return s
    F = s.cumulative
    Fprev = np.concatenate(([0.0], F[:-1]))
    if mode == "max":
        w = F ** m - Fprev ** m
    elif mode == "min":
        w = (1.0 - Fprev) ** m - (1.0 - F) ** m
    else:
        raise DomainError(f"unknown extension mode {mode!r}")
    w = np.maximum(w, 0.0)
    keep = w > 0
    w = w[keep]
    return WeightedSample._trusted(s.values[keep], w / w.sum())


# ---------------------------------------------------------------------------
# declarative gauge description

_PARAM_KINDS = {
    "quantile": 1,
    "quantile-upper": 1,
    "essinf": 0,
    "esssup": 0,
    "mean": 0,
    "avgq-right": 1,
    "avgq-left": 1,
    "expectile": 1,
    "norm": 2,
}
_WRAPPER_KINDS = ("dual", "maxext", "minext")


def _fmt_num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class GaugeSpec:
    """Declarative description of a scalar gauge.

    ``kind`` is one of the grammar keywords (``quantile``, ``avgq-right``,
    ``dual``, ...); ``params`` holds its numeric parameters and ``inner``
    the wrapped gauge for ``dual``/``maxext``/``minext``.
    """

    kind: str
    params: tuple = ()
    inner: Optional["GaugeSpec"] = None

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k, p = self.kind, self.params
        if k in _PARAM_KINDS:
            if len(p) != _PARAM_KINDS[k] or self.inner is not None:
                raise DomainError(f"gauge {k!r} takes {_PARAM_KINDS[k]} parameter(s)")
        elif k == "dual":
            if p or self.inner is None:
                raise DomainError("dual needs an inner gauge and no parameters")
        elif k in ("maxext", "minext"):
            if len(p) != 1 or self.inner is None:
                raise DomainError(f"{k} needs an order and an inner gauge")
            if not p[0].is_integer() or p[0] < 1:
                raise DomainError(f"{k} order must be an integer >= 1")
        else:
            raise DomainError(f"unknown gauge kind {k!r}")
        if k == "quantile" and not 0.0 < p[0] <= 1.0:
            raise DomainError("quantile level must lie in (0, 1]")
        if k in ("quantile-upper", "avgq-right") and not 0.0 <= p[0] < 1.0:
            raise DomainError(f"{k} level must lie in [0, 1)")
        if k == "avgq-left" and not 0.0 < p[0] <= 1.0:
            raise DomainError("avgq-left level must lie in (0, 1]")
        if k == "expectile" and not 0.0 < p[0] < 1.0:
            raise DomainError("expectile level must lie in (0, 1)")
        if k == "norm" and not (1.0 <= p[0] < math.inf and 0.0 <= p[1] <= 1.0):
            raise DomainError("norm gauge needs p in [1, inf) and a in [0, 1]")
        if self.depth > MAX_NESTING:
            raise DomainError(f"gauge nesting deeper than {MAX_NESTING}")

    # constructors -------------------------------------------------------
    @classmethod
    def quantile(cls, alpha):
        return cls("quantile", (alpha,))

    @classmethod
    def quantile_upper(cls, alpha):
        return cls("quantile-upper", (alpha,))

    @classmethod
    def essinf(cls):
        return cls("essinf")

    @classmethod
    def esssup(cls):
        return cls("esssup")

    @classmethod
    def mean(cls):
        return cls("mean")

    @classmethod
    def avgq_right(cls, alpha):
        return cls("avgq-right", (alpha,))

    @classmethod
    def avgq_left(cls, alpha):
        return cls("avgq-left", (alpha,))

    @classmethod
    def expectile(cls, tau):
        return cls("expectile", (tau,))

    @classmethod
    def norm(cls, p, a):
        return cls("norm", (p, a))

    @classmethod
    def dual(cls, inner):
        return cls("dual", (), inner)

    @classmethod
    def maxext(cls, m, inner):
        return cls("maxext", (m,), inner)

    @classmethod
    def minext(cls, m, inner):
        return cls("minext", (m,), inner)

    # derived flags ------------------------------------------------------
    @property
    def depth(self) -> int:
        return 0 if self.inner is None else 1 + self.inner.depth

    @property
    def is_sublinear(self) -> bool:
        k, p = self.kind, self.params
        if k in ("esssup", "mean", "avgq-right", "norm"):
            return True
        if k == "quantile":
            return p[0] == 1.0
        if k == "avgq-left":
            return p[0] == 1.0
        if k == "expectile":
            return p[0] >= 0.5
        if k == "dual":
            return self.inner.is_superlinear
        if k == "maxext":
            return self.inner.is_sublinear
        if k == "minext":
            return p[0] == 1.0 and self.inner.is_sublinear
        return False

    @property
    def is_superlinear(self) -> bool:
        k, p = self.kind, self.params
        if k in ("essinf", "mean", "avgq-left"):
            return True
        if k == "quantile-upper":
            return p[0] == 0.0
        if k == "avgq-right":
            return p[0] == 0.0
        if k == "expectile":
            return p[0] <= 0.5
        if k == "norm":
            return p[1] == 0.0
        if k == "dual":
            return self.inner.is_sublinear
        if k == "minext":
            return self.inner.is_superlinear
        if k == "maxext":
            return p[0] == 1.0 and self.inner.is_superlinear
        return False

    @property
    def is_g9(self) -> bool:
        """Whether positive mass at ``+inf`` forces the value ``+inf``."""
        k, p = self.kind, self.params
        if k in ("mean", "avgq-right", "expectile", "norm", "esssup"):
            return True
        if k in ("quantile", "avgq-left"):
            return p[0] == 1.0
        if k in ("maxext", "minext"):
            return self.inner.is_g9
        return False

    # grammar ------------------------------------------------------------
    def __str__(self):
        head = self.kind
        if self.params:
            head += ":" + ":".join(_fmt_num(x) for x in self.params)
        if self.inner is not None:
            head += f"({self.inner})"
        return head

    @classmethod
    def parse(cls, text: str) -> "GaugeSpec":
        """Parse the command-line grammar, e.g. ``maxext:3(avgq-right:0.9)``."""
        spec, rest = _parse_spec(text.strip(), 0)
        if rest != len(text.strip()):
            tok = text.strip()[rest:]
            raise GaugeSpecError(f"unexpected trailing input {tok!r}", tok)
        return spec


_HEAD = re.compile(r"([a-z][a-z-]*)((?::[^:()]*)*)")


def _parse_spec(text: str, pos: int):
    m = _HEAD.match(text, pos)
    if m is None:
        tok = text[pos:] or "<empty>"
        raise GaugeSpecError(f"cannot parse gauge at {tok!r}", tok)
    kind = m.group(1)
    raw = [t for t in m.group(2).split(":")[1:]]
    if kind not in _PARAM_KINDS and kind not in _WRAPPER_KINDS:
        raise GaugeSpecError(f"unknown gauge {kind!r}", kind)
    params = []
    for tok in raw:
        try:
            params.append(float(tok))
        except ValueError:
            raise GaugeSpecError(f"bad number {tok!r} in gauge {kind!r}", tok) from None
    pos = m.end()
    inner = None
    if kind in _WRAPPER_KINDS:
        if pos >= len(text) or text[pos] != "(":
            raise GaugeSpecError(f"{kind} needs a parenthesised inner gauge", kind)
        inner, pos = _parse_spec(text, pos + 1)
        if pos >= len(text) or text[pos] != ")":
            tok = text[pos:] or "<end>"
            raise GaugeSpecError(f"missing ')' at {tok!r}", tok)
        pos += 1
    try:
        spec = GaugeSpec(kind, tuple(params), inner)
    except DomainError as exc:
        tok = m.group(0)
        raise GaugeSpecError(f"invalid gauge {tok!r}: {exc}", tok) from None
    return spec, pos


# ---------------------------------------------------------------------------
# evaluation


def dual_eval(inner: GaugeSpec, s: WeightedSample) -> float:
    """``-g(-X)``; undefined when ``X`` has mass at ``+inf``."""
    if s.has_inf:
        raise DomainError("dual gauge undefined for samples with mass at +inf")
    return -eval_gauge(inner, -s)


def eval_gauge(spec: GaugeSpec, s: WeightedSample) -> float:
    k, p = spec.kind, spec.params
    if k == "quantile":
        return quantile_lower(s, p[0])
    if k == "quantile-upper":
        return quantile_upper(s, p[0])
    if k == "essinf":
        return essinf(s)
    if k == "esssup":
        return esssup(s)
    if k == "mean":
        return s.mean()
    if k == "avgq-right":
        return avg_quantile_right(s, p[0])
    if k == "avgq-left":
        return avg_quantile_left(s, p[0])
    if k == "expectile":
        return expectile(s, p[0])
    if k == "norm":
        return norm_gauge(s, p[0], p[1])
    if k == "dual":
        return dual_eval(spec.inner, s)
    if k == "maxext":
        return eval_gauge(spec.inner, iid_extension(s, int(p[0]), "max"))
    if k == "minext":
        return eval_gauge(spec.inner, iid_extension(s, int(p[0]), "min"))
    raise DomainError(f"unknown gauge kind {k!r}")
