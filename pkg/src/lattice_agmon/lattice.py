"""Finite boxes of the scaled lattice (eps*Z)^d with dense site enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeDomain:
    """A box Sigma intersected with (eps*Z)^d.

    `box` holds inclusive integer index ranges per axis; site x = eps * k for
    an integer vector k inside the box.  Enumeration is row-major over the
    index grid and is an exact bijection onto 0..n_sites-1.
    """

    dim: int
    epsilon: float
    box: tuple  # ((k_lo, k_hi), ...) inclusive integer ranges

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be positive")
        if not (self.epsilon > 0):
            raise DomainError("epsilon must be positive")
        box = tuple((int(lo), int(hi)) for lo, hi in self.box)
        if len(box) != self.dim:
            raise DomainError(f"box has {len(box)} axes, expected {self.dim}")
        for lo, hi in box:
            if hi < lo:
                raise DomainError(f"empty index range ({lo}, {hi})")
        object.__setattr__(self, "box", box)

    @classmethod
    def from_bounds(cls, dim, epsilon, bounds) -> "LatticeDomain":
        """Domain from real bounds [(lo, hi), ...]; index ranges round inward."""
        box = []
        for lo, hi in bounds:
            k_lo = int(np.ceil(lo / epsilon - 1e-12))
            k_hi = int(np.floor(hi / epsilon + 1e-12))
            box.append((k_lo, k_hi))
        return cls(dim, float(epsilon), tuple(box))

    @property
    def shape(self):
        return tuple(hi - lo + 1 for lo, hi in self.box)

    @property
    def n_sites(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n

    def keys(self) -> np.ndarray:
        """Integer index vectors of all sites, shape (n_sites, dim)."""
        grids = np.meshgrid(*[np.arange(lo, hi + 1) for lo, hi in self.box], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def sites(self) -> np.ndarray:
        """Coordinates of all sites, shape (n_sites, dim)."""
        return self.epsilon * self.keys().astype(float)

    def contains_key(self, k) -> np.ndarray:
        k = np.asarray(k)
        ok = np.ones(k.shape[:-1], dtype=bool)
        for i, (lo, hi) in enumerate(self.box):
            ok &= (k[..., i] >= lo) & (k[..., i] <= hi)
        return ok

    def key_to_index(self, k) -> np.ndarray:
        """Flat enumeration index of integer vectors k (must lie inside the box)."""
        k = np.asarray(k)
        idx = np.zeros(k.shape[:-1], dtype=np.int64)
        for i, (lo, _hi) in enumerate(self.box):
            idx = idx * self.shape[i] + (k[..., i] - lo)
        return idx

    def index_to_key(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.empty(idx.shape + (self.dim,), dtype=np.int64)
        rem = idx
        for i in range(self.dim - 1, -1, -1):
            lo, _hi = self.box[i]
            out[..., i] = rem % self.shape[i] + lo
            rem = rem // self.shape[i]
        return out

    def index_to_point(self, idx) -> np.ndarray:
        return self.epsilon * self.index_to_key(idx).astype(float)

    def point_to_index(self, x) -> int:
        """Exact inverse of index_to_point; raises if x is not a site."""
        x = np.asarray(x, dtype=float).reshape(self.dim)
        k = np.rint(x / self.epsilon).astype(np.int64)
        if not np.allclose(k * self.epsilon, x, rtol=0, atol=1e-9 * max(1.0, self.epsilon)):
            raise DomainError(f"{x} is not a lattice point at spacing {self.epsilon}")
        if not self.contains_key(k):
            raise DomainError(f"{x} lies outside the domain box")
        return int(self.key_to_index(k))

    def origin_index(self) -> int:
        """Enumeration index of the site x = 0."""
        return self.point_to_index(np.zeros(self.dim))

    def with_epsilon(self, epsilon, bounds=None) -> "LatticeDomain":
        """Same real box resampled at a different spacing."""
        if bounds is None:
            bounds = [(lo * self.epsilon, hi * self.epsilon) for lo, hi in self.box]
        return LatticeDomain.from_bounds(self.dim, epsilon, bounds)

    def bounds(self):
        return tuple((lo * self.epsilon, hi * self.epsilon) for lo, hi in self.box)
