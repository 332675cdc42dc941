"""Tensor-grid scalar fields over subsets of the (t, x, v) coordinates.

A :class:`GridFunction` stores node values on an axis-aligned tensor grid.
Axes may be non-uniform (the solver grades its x axis toward the wall);
quadrature is trapezoidal per axis, so integrating the constant 1 recovers
the box volume exactly up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXIS_NAMES = ("t", "x", "v")


@dataclass(frozen=True)
class Axis:
    """One grid axis: a name from {t, x, v} and strictly increasing nodes."""

    name: str
    nodes: np.ndarray

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name {self.name!r} not in {AXIS_NAMES}")
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("axis needs at least 2 nodes")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("axis nodes must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("axis nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, name: str, lo: float, hi: float, num: int) -> "Axis":
        return cls(name, np.linspace(lo, hi, num))

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def num(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Uniform spacing; raises if the axis is graded."""
        d = np.diff(self.nodes)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
            raise ValueError(f"axis {self.name!r} is not uniform")
        return float(d[0])

    def trapezoid_weights(self) -> np.ndarray:
        d = np.diff(self.nodes)
        w = np.zeros(self.num)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
        return w


class GridFunction:
    """Scalar field sampled on a tensor grid.

    values[i0, i1, ...] corresponds to (axes[0].nodes[i0], axes[1].nodes[i1], ...)
    in the order the axes were given.
    """

    def __init__(self, axes, values, require_nonnegative: bool = False):
        self.axes = tuple(axes)
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names {names}")
        values = np.asarray(values, dtype=float)
        expected = tuple(a.num for a in self.axes)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} != grid shape {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if require_nonnegative and np.any(values < 0):
            raise ValueError("values must be nonnegative")
        self.values = values

    @property
    def names(self):
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(name)

    def box(self):
        """((lo, hi), ...) per axis, in axis order."""
        return tuple((a.lo, a.hi) for a in self.axes)

    def volume(self) -> float:
        return float(np.prod([a.hi - a.lo for a in self.axes]))

    def _weight_grid(self) -> np.ndarray:
        w = self.axes[0].trapezoid_weights()
        for a in self.axes[1:]:
            w = np.multiply.outer(w, a.trapezoid_weights())
        return w

    def integrate(self) -> float:
        return float(np.sum(self._weight_grid() * self.values))

    def lp_norm(self, p: float, mask: np.ndarray | None = None) -> float:
        """Trapezoid L^p norm; p = inf gives the max of |values| (over mask)."""
        vals = np.abs(self.values)
        if mask is not None:
            vals = np.where(mask, vals, 0.0)
        if np.isinf(p):
            return float(vals.max())
        w = self._weight_grid()
        return float(np.sum(w * vals**p) ** (1.0 / p))

    def interp(self, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at pts of shape (N, ndim), axis order.

        Points outside the grid box raise: callers are expected to have
        checked their enlarged domains first.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != len(self.axes):
            raise ValueError("point dimension mismatch")
        idx = []
        frac = []
        for k, a in enumerate(self.axes):
            q = pts[:, k]
            if np.any(q < a.lo - 1e-12) or np.any(q > a.hi + 1e-12):
                raise ValueError(f"interpolation point outside axis {a.name!r}")
            i = np.clip(np.searchsorted(a.nodes, q, side="right") - 1, 0, a.num - 2)
            h = a.nodes[i + 1] - a.nodes[i]
            th = np.clip((q - a.nodes[i]) / h, 0.0, 1.0)
            idx.append(i)
            frac.append(th)
        out = np.zeros(pts.shape[0])
        for corner in range(2 ** len(self.axes)):
            sel = tuple(
                idx[k] + ((corner >> k) & 1) for k in range(len(self.axes))
            )
            wgt = np.ones(pts.shape[0])
            for k in range(len(self.axes)):
                th = frac[k]
                wgt = wgt * (th if (corner >> k) & 1 else 1.0 - th)
            out += wgt * self.values[sel]
        return out
