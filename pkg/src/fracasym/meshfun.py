"""Graded meshes and grid functions with power-law heads and tails.

The functions this package manipulates live on [0, infinity) and are
singular or cusped at the origin (powers t^e with e in (-1, 1)) while
decaying or growing like powers at infinity. A GridFunction therefore
carries three pieces:

* node values on a graded mesh t_j = t_max * (j/n)^grading, which
  clusters nodes near the origin where the kernels are singular;
* a power "head": f(t) = values[0] * t^head_exponent + r(t) near 0,
  with r(0) = 0. values[0] stores the head coefficient, i.e. the limit
  of t^(-head_exponent) * f(t) at the origin. head_exponent = 0 is the
  ordinary continuous case where values[0] is just f(0).
* a TailModel describing behaviour past t_max: nothing ("zero") or an
  envelope |f(t)| <= amplitude * t^(-exponent) valid from valid_from.

Quadrature and metric code treats the head in closed form and the node
values by trapezoid panels, so singular factors are never interpolated
linearly across the origin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GradedGrid",
    "TailModel",
    "GridFunction",
    "WeightedMetric",
    "make_graded_grid",
    "metric_distance",
    "integrate",
]

_trapz = np.trapezoid if hasattr(np, "trapezoid") else np.trapz


@dataclass(frozen=True, eq=False)
class GradedGrid:
    """Nodes t_j = t_max * (j/n)^grading for j = 0..n."""

    t_max: float
    n: int
    grading: float
    nodes: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not self.t_max > 0.0:
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")
        if self.n < 16:
            raise ValueError(f"need at least 16 panels, got n={self.n!r}")
        if not self.grading >= 1.0:
            raise ValueError(f"grading must be >= 1, got {self.grading!r}")
        if self.nodes is None:
            j = np.arange(self.n + 1, dtype=np.float64)
            t = self.t_max * (j / self.n) ** self.grading
            t[-1] = self.t_max  # guard rounding at the right end
            object.__setattr__(self, "nodes", t)

    def same_layout(self, other: "GradedGrid") -> bool:
        return (
            self.t_max == other.t_max
            and self.n == other.n
            and self.grading == other.grading
        )

    def index_at_or_above(self, t: float) -> int:
        """Smallest j with t_j >= t."""
        return int(np.searchsorted(self.nodes, t, side="left"))


def make_graded_grid(t_max: float = 100.0, n: int = 4096, grading: float = 2.0) -> GradedGrid:
    return GradedGrid(t_max=float(t_max), n=int(n), grading=float(grading))


@dataclass(frozen=True)
class TailModel:
    """Behaviour past the horizon: kind 'zero' or 'power'.

    'power' asserts |f(t)| <= amplitude * t^(-exponent) for t >= valid_from
    and is integrated in closed form as amplitude * t^(1-exponent)/(exponent-1).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    exponent: float = 0.0
    valid_from: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "power"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "power" and not self.amplitude >= 0.0:
            raise ValueError("tail amplitude must be nonnegative")

    def integral_from(self, lo: float) -> float:
        """Closed-form integral of the modelled tail over [lo, infinity)."""
        if self.kind == "zero":
            return 0.0
        if not self.exponent > 1.0:
            raise ValueError(
                f"tail with decay exponent {self.exponent!r} is not integrable"
            )
        lo = max(float(lo), self.valid_from)
        if lo <= 0.0:
            raise ValueError("power tail integral needs a positive lower limit")
        return self.amplitude * lo ** (1.0 - self.exponent) / (self.exponent - 1.0)


ZERO_TAIL = TailModel()


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled function with a power head at 0 and a tail model past t_max."""

    grid: GradedGrid
    values: np.ndarray
    tail: TailModel = ZERO_TAIL
    head_exponent: float = 0.0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(
                f"values shape {v.shape} does not match grid with {self.grid.n + 1} nodes"
            )
        if not self.head_exponent > -1.0:
            raise ValueError(
                f"head exponent must exceed -1 for integrability, got {self.head_exponent!r}"
            )
        object.__setattr__(self, "values", v)

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_callable(
        grid: GradedGrid,
        fn: Callable[[np.ndarray], np.ndarray],
        tail: TailModel = ZERO_TAIL,
        head_exponent: float = 0.0,
        head_coefficient: float | None = None,
    ) -> "GridFunction":
        """Sample fn at positive nodes; node 0 stores the head coefficient.

        For head_exponent 0 the coefficient defaults to fn(0); otherwise it
        must be supplied (it is the limit of t^(-e) fn(t), which sampling
        cannot produce).
        """
        t = grid.nodes
        vals = np.empty_like(t)
        vals[1:] = np.asarray(fn(t[1:]), dtype=np.float64)
        if head_exponent == 0.0:
            if head_coefficient is None:
                head_coefficient = float(fn(np.array([0.0]))[0])
        elif head_coefficient is None:
            raise ValueError("a nonzero head exponent needs an explicit coefficient")
        vals[0] = head_coefficient
        return GridFunction(grid, vals, tail=tail, head_exponent=head_exponent)

    # -- head/remainder split ---------------------------------------------

    @property
    def head_coefficient(self) -> float:
        return float(self.values[0])

    def head_at(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the head c * t^e at positive times t."""
        return self.values[0] * np.power(t, self.head_exponent)

    def regular_part(self) -> np.ndarray:
        """Node values of r = f - c*t^e; r[0] = 0 by construction."""
        r = np.empty_like(self.values)
        r[0] = 0.0
        if self.values[0] == 0.0:
            r[1:] = self.values[1:]
        else:
            r[1:] = self.values[1:] - self.head_at(self.grid.nodes[1:])
        return r

    def pointwise_values(self) -> np.ndarray:
        """Values with the coefficient slot replaced by the limit at 0.

        A decaying head contributes 0 there, an exponent-0 head is the
        value itself, and a singular head has no finite limit to report.
        """
        if self.head_exponent == 0.0:
            return self.values.copy()
        v = self.values.copy()
        if self.head_exponent > 0.0 or v[0] == 0.0:
            v[0] = 0.0
            return v
        raise ValueError(
            f"head t^{self.head_exponent!r} has no finite value at the origin"
        )

    # -- arithmetic (same grid and head exponent; tails are dropped) -------

    def _check_compatible(self, other: "GridFunction") -> None:
        if not self.grid.same_layout(other.grid):
            raise ValueError("grid functions live on different grids")
        if self.head_exponent != other.head_exponent:
            raise ValueError(
                "head exponents differ "
                f"({self.head_exponent!r} vs {other.head_exponent!r})"
            )

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(
            self.grid, self.values + other.values, head_exponent=self.head_exponent
        )

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(
            self.grid, self.values - other.values, head_exponent=self.head_exponent
        )

    def scaled(self, s: float) -> "GridFunction":
        tail = self.tail
        if tail.kind == "power":
            tail = replace(tail, amplitude=tail.amplitude * abs(s))
        return GridFunction(
            self.grid, self.values * s, tail=tail, head_exponent=self.head_exponent
        )

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "grid": {
                "t_max": self.grid.t_max,
                "n": self.grid.n,
                "grading": self.grid.grading,
            },
            "head_exponent": self.head_exponent,
            "values": self.values.tolist(),
            "tail": {
                "kind": self.tail.kind,
                "amplitude": self.tail.amplitude,
                "exponent": self.tail.exponent,
                "valid_from": self.tail.valid_from,
            },
        }

    @staticmethod
    def from_json_dict(d: dict) -> "GridFunction":
        g = d["grid"]
        grid = GradedGrid(t_max=g["t_max"], n=g["n"], grading=g["grading"])
        tl = d["tail"]
        tail = TailModel(
            kind=tl["kind"],
            amplitude=tl["amplitude"],
            exponent=tl["exponent"],
            valid_from=tl["valid_from"],
        )
        return GridFunction(
            grid,
            np.asarray(d["values"], dtype=np.float64),
            tail=tail,
            head_exponent=d["head_exponent"],
        )

    def to_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)
            fh.write("\n")

    @staticmethod
    def from_json(path: str) -> "GridFunction":
        with open(path) as fh:
            return GridFunction.from_json_dict(json.load(fh))

    def to_csv(self, path: str) -> None:
        """Two columns t,value; the first row carries the head coefficient."""
        with open(path, "w", newline="\n") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.grid.nodes, self.values):
                fh.write(f"{float(t)!r},{float(v)!r}\n")


@dataclass(frozen=True)
class WeightedMetric:
    """Distance on grid functions; kind selects the weighting.

    sup_plain               sup |f - g|
    sup_over_t_alpha_after_T  max of sup on [0, T] and sup of |f-g|/t^alpha on [T, inf)
    sup_t_one_minus_alpha   sup t^(1-alpha) |f - g|
    max_sup_and_L1          max of sup |f - g| and the L1 norm of f - g
    """

    kind: str
    split: float = 1.0
    alpha: float = 0.5

    _KINDS = (
        "sup_plain",
        "sup_over_t_alpha_after_T",
        "sup_t_one_minus_alpha",
        "max_sup_and_L1",
    )

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "sup_over_t_alpha_after_T" and not self.split > 0.0:
            raise ValueError("the split point must be positive")


def _origin_sup_term(delta0: float, head_exponent: float, weight_exponent: float) -> float:
    """Contribution of the origin to sup of t^weight_exponent |delta|.

    The difference behaves like delta0 * t^head_exponent near 0, so the
    weighted value tends to |delta0| when the exponents cancel, to 0 when
    the head decays faster than the weight grows, and diverges otherwise.
    """
    e = head_exponent + weight_exponent
    if e > 0.0:
        return 0.0
    if e == 0.0:
        return abs(float(delta0))
    return math.inf if delta0 != 0.0 else 0.0


def metric_distance(metric: WeightedMetric, f: GridFunction, g: GridFunction) -> float:
    f._check_compatible(g)
    t = f.grid.nodes
    d = f.values - g.values
    e = f.head_exponent
    interior = np.abs(d[1:])

    if metric.kind == "sup_plain":
        return max(float(interior.max()), _origin_sup_term(d[0], e, 0.0))

    if metric.kind == "sup_over_t_alpha_after_T":
        T = metric.split
        before = t[1:] <= T
        after = t[1:] >= T
        sup_before = float(interior[before].max()) if before.any() else 0.0
        sup_before = max(sup_before, _origin_sup_term(d[0], e, 0.0))
        if after.any():
            sup_after = float((interior[after] / t[1:][after] ** metric.alpha).max())
        else:
            sup_after = 0.0
        return max(sup_before, sup_after)

    if metric.kind == "sup_t_one_minus_alpha":
        w = 1.0 - metric.alpha
        sup_pos = float((t[1:] ** w * interior).max())
        return max(sup_pos, _origin_sup_term(d[0], e, w))

    # max_sup_and_L1
    sup = max(float(interior.max()), _origin_sup_term(d[0], e, 0.0))
    l1 = _l1_norm_grid(f - g)
    for gf in (f, g):
        if gf.tail.kind == "power":
            l1 += gf.tail.integral_from(gf.grid.t_max)
    return max(sup, l1)


def _l1_norm_grid(f: GridFunction) -> float:
    """Trapezoid of |f| over the grid, a nonzero head handled separately."""
    t = f.grid.nodes
    c = f.values[0]
    e = f.head_exponent
    if c == 0.0 or e == 0.0:
        return float(_trapz(np.abs(f.values), t))
    # a genuine power head: bound |f| <= |r| + |c| t^e, with the head's
    # L1 mass over [0, t_max] in closed form (exact near the singularity,
    # where sampling cannot resolve it).
    r = f.regular_part()
    out = float(_trapz(np.abs(r), t))
    out += abs(c) * f.grid.t_max ** (1.0 + e) / (1.0 + e)
    return out


def integrate(f: GridFunction, a: float, b: float) -> float:
    """Integral of f over [a, b], b may be inf.

    Node values are integrated by the trapezoid rule with the power head
    taken in closed form; (t_max, b] uses the tail model. A finite b past
    t_max or b = inf requires a tail model (kind 'zero' is acceptable).
    """
    if math.isnan(a) or a < 0.0:
        raise ValueError(f"lower limit must be >= 0, got {a!r}")
    if not b >= a:
        raise ValueError(f"integration limits out of order: [{a!r}, {b!r}]")
    t = f.grid.nodes
    t_max = f.grid.t_max

    hi = min(b, t_max)
    total = 0.0
    if hi > a:
        r = f.regular_part()
        lo_i = np.searchsorted(t, a, side="left")
        hi_i = np.searchsorted(t, hi, side="right") - 1
        # interior full panels
        if hi_i > lo_i:
            seg_t = t[lo_i : hi_i + 1]
            seg_r = r[lo_i : hi_i + 1]
            total += float(_trapz(seg_r, seg_t))
        # partial panels at both ends, remainder interpolated linearly
        def r_at(x: float) -> float:
            j = max(1, min(f.grid.n, int(np.searchsorted(t, x, side="right"))))
            t0, t1 = t[j - 1], t[j]
            w = 0.0 if t1 == t0 else (x - t0) / (t1 - t0)
            return float(r[j - 1] * (1.0 - w) + r[j] * w)

        if t[lo_i] > a:
            total += 0.5 * (r_at(a) + r[lo_i]) * (t[lo_i] - a)
        if hi_i >= 0 and t[hi_i] < hi:
            total += 0.5 * (r[hi_i] + r_at(hi)) * (hi - t[hi_i])
        c = f.values[0]
        if c != 0.0:
            e = f.head_exponent
            total += c * (hi ** (1.0 + e) - a ** (1.0 + e)) / (1.0 + e)

    if b > t_max:
        if f.tail.kind == "zero":
            pass
        else:
            total += f.tail.integral_from(max(a, t_max))
            if math.isfinite(b):
                # subtract the part past b
                total -= f.tail.integral_from(b)
    return total
