"""Coefficient stencils, potentials, and the leading symbol of the kinetic part.

A stencil holds the finitely supported coefficients a_{eps*eta}(x, eps) of the
translation sum indexed by integer offsets eta.  The leading coefficients
a0[eta] define the symbol t0(x, xi) = sum_eta a0_eta(x) cos(eta.xi) and the
positive definite matrix B(x) = -1/2 sum_eta a0_eta(x) eta eta^T that governs
the small-xi quadratic behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .expressions import ScalarField, constant_field


class HypothesisViolation(ValueError):
    """A structural condition on the coefficients or the potential fails."""


class StencilField:
    """Finitely supported offset -> coefficient maps.

    Parameters
    ----------
    offsets : (m, d) integer array of offsets eta; must contain 0 and be
        symmetric under eta -> -eta.
    a0 : per-offset leading coefficients (expressions, numbers or ScalarField).
    a1 : optional per-offset first-order corrections; default zero.
    r2 : optional callable (offset_index, x_batch, eps) -> values for the
        second order remainder; default zero.
    decay_rate : declared exponential decay rate of the per-offset norms, used
        by the validator when the support has more than nearest-neighbour
        shells.
    midpoint : if True the full coefficient is evaluated at the bond midpoint,
        a_{eps*eta}(x, eps) = a0_eta(x + eps*eta/2), which makes the assembled
        matrix exactly symmetric for x-dependent coefficients; a1 and r2 are
        then derived, not supplied.
    """

    def __init__(self, dim, offsets, a0, a1=None, r2=None, decay_rate=None,
                 midpoint=False, truncation_tail_mass=0.0):
        self.dim = int(dim)
        self.offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, self.dim)
        m = len(self.offsets)
        self.a0 = [self._as_field(f) for f in a0]
        if len(self.a0) != m:
            raise ValueError("a0 must provide one entry per offset")
        if midpoint and (a1 is not None or r2 is not None):
            raise ValueError("midpoint stencils derive a1 and r2 internally")
        if a1 is None:
            a1 = [0.0] * m
        self.a1 = [self._as_field(f) for f in a1]
        self.r2 = r2
        self.decay_rate = decay_rate
        self.midpoint = bool(midpoint)
        self.truncation_tail_mass = float(truncation_tail_mass)

        self._index = {tuple(eta): i for i, eta in enumerate(self.offsets)}
        if len(self._index) != m:
            raise ValueError("duplicate offsets")
        if tuple([0] * self.dim) not in self._index:
            raise ValueError("offset 0 must be part of the stencil")
        for eta in self.offsets:
            if tuple(-eta) not in self._index:
                raise ValueError(f"offset set not symmetric: missing {tuple(-eta)}")

    def _as_field(self, f):
        if isinstance(f, ScalarField):
            if f.dim != self.dim:
                raise ValueError("field dimension mismatch")
            return f
        if isinstance(f, (int, float)):
            return constant_field(float(f), self.dim)
        return ScalarField(f, self.dim)

    @property
    def n_offsets(self):
        return len(self.offsets)

    def offset_index(self, eta) -> int:
        return self._index[tuple(int(e) for e in np.asarray(eta).reshape(self.dim))]

    def a0_values(self, x) -> np.ndarray:
        """Leading coefficients at points x (..., d); shape (m, ...)."""
        pts = np.asarray(x, dtype=float)
        return np.stack([f(pts) for f in self.a0])

    def coefficient(self, i, x, eps, order=2):
        """a_{eps*eta_i}(x, eps) truncated at the requested expansion order."""
        pts = np.asarray(x, dtype=float)
        if self.midpoint:
            if order == 0:
                return self.a0[i](pts)
            shifted = pts + 0.5 * eps * self.offsets[i]
            if order == 1:
                grad = self.a0[i].gradient()
                corr = sum(0.5 * self.offsets[i][k] * grad[k](pts) for k in range(self.dim))
                return self.a0[i](pts) + eps * corr
            return self.a0[i](shifted)
        val = self.a0[i](pts)
        if order >= 1:
            val = val + eps * self.a1[i](pts)
        if order >= 2 and self.r2 is not None:
            val = val + np.asarray(self.r2(i, pts, eps), dtype=float)
        return val

    def nonzero_offsets(self):
        """Offsets excluding 0."""
        return [eta for eta in self.offsets if np.any(eta != 0)]


def symbol_t0(stencil: StencilField, x, xi) -> np.ndarray:
    """Leading symbol sum_eta a0_eta(x) cos(eta.xi); even and 2pi-periodic in xi."""
    xi = np.asarray(xi, dtype=float)
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi must be finite")
    vals = stencil.a0_values(x)  # (m, ...)
    phases = np.tensordot(np.asarray(xi, float), stencil.offsets.astype(float).T, axes=([-1], [0]))
    # phases has shape (..., m); move offset axis first to match vals
    phases = np.moveaxis(phases, -1, 0)
    return np.sum(vals * np.cos(phases), axis=0)


def kinetic_matrix_B(stencil: StencilField, x) -> np.ndarray:
    """B(x) = -1/2 sum_eta a0_eta(x) eta eta^T; raises unless positive definite."""
    x = np.asarray(x, dtype=float).reshape(stencil.dim)
    vals = stencil.a0_values(x.reshape(1, -1))[:, 0]
    eta = stencil.offsets.astype(float)
    B = -0.5 * np.einsum("m,mi,mj->ij", vals, eta, eta)
    B = 0.5 * (B + B.T)
    w = np.linalg.eigvalsh(B)
    if w.min() <= 0:
        raise HypothesisViolation(
            f"kinetic matrix B(x) not positive definite at x={x} (min eigenvalue {w.min():.3e}); "
            "offsets with negative coefficients must span R^d")
    return B


@dataclass
class PotentialSpec:
    """One-well potential V = V0 + eps*V1 + ... with the well pinned at x = 0."""

    v0: ScalarField
    v_corrections: Sequence[ScalarField] = ()
    hessian_at_well: Optional[np.ndarray] = None
    well: Optional[np.ndarray] = None

    def __post_init__(self):
        self.dim = self.v0.dim
        self.v_corrections = tuple(
            c if isinstance(c, ScalarField) else ScalarField(c, self.dim)
            for c in self.v_corrections)
        self.well = np.zeros(self.dim) if self.well is None else np.asarray(self.well, float)
        if np.any(self.well != 0):
            raise HypothesisViolation("the well must sit at x = 0")
        if self.hessian_at_well is None:
            self.hessian_at_well = self.v0.hessian_at(self.well)
        self.hessian_at_well = np.asarray(self.hessian_at_well, dtype=float)

    @classmethod
    def from_expression(cls, expr, dim, corrections=(), hessian=None):
        return cls(ScalarField(expr, dim),
                   tuple(ScalarField(c, dim) for c in corrections),
                   hessian)

    def v_eps(self, x, eps) -> np.ndarray:
        """Full potential including all supplied corrections."""
        val = self.v0(x)
        for l, corr in enumerate(self.v_corrections, start=1):
            val = val + (eps ** l) * corr(x)
        return val

    def hessian_fd(self, h=1e-5) -> np.ndarray:
        """Central finite-difference Hessian of V0 at the well (validation oracle)."""
        d = self.dim
        H = np.empty((d, d))
        e = np.eye(d)
        f0 = self.v0.at(self.well)
        for i in range(d):
            fp = self.v0.at(self.well + h * e[i])
            fm = self.v0.at(self.well - h * e[i])
            H[i, i] = (fp - 2 * f0 + fm) / h ** 2
            for j in range(i + 1, d):
                fpp = self.v0.at(self.well + h * e[i] + h * e[j])
                fpm = self.v0.at(self.well + h * e[i] - h * e[j])
                fmp = self.v0.at(self.well - h * e[i] + h * e[j])
                fmm = self.v0.at(self.well - h * e[i] - h * e[j])
                H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4 * h ** 2)
        return H


def laplacian_stencil(dim: int) -> StencilField:
    """Nearest-neighbour stencil: a0_0 = 2d, a0_{+-e_k} = -1."""
    offsets = [tuple([0] * dim)]
    coeffs = [2.0 * dim]
    for k in range(dim):
        for s in (+1, -1):
            eta = [0] * dim
            eta[k] = s
            offsets.append(tuple(eta))
            coeffs.append(-1.0)
    return StencilField(dim, offsets, coeffs)


def exponential_stencil(dim: int, rate: float, radius: int, amplitude=1.0) -> StencilField:
    """Truncated exponential family a0_eta = -amplitude*exp(-rate*|eta|), eta != 0.

    The zero offset absorbs the negative total so the zero-sum condition holds
    exactly on the retained support.  The dropped tail mass (an upper bound on
    the l1 norm of the discarded coefficients) is recorded on the stencil.
    """
    if rate <= 0 or radius < 1:
        raise ValueError("rate must be positive and radius >= 1")
    offsets, coeffs = [], []
    total = 0.0
    grid = np.arange(-radius, radius + 1)
    mesh = np.meshgrid(*([grid] * dim), indexing="ij")
    for eta in np.stack([g.ravel() for g in mesh], axis=-1):
        if np.all(eta == 0):
            continue
        c = -amplitude * np.exp(-rate * np.linalg.norm(eta))
        offsets.append(tuple(eta))
        coeffs.append(c)
        total += c
    offsets.insert(0, tuple([0] * dim))
    coeffs.insert(0, -total)
    # crude tail bound: sum over shells |eta| > radius of surface * exp(-rate*s)
    tail = 0.0
    s = radius + 1
    while True:
        shell = amplitude * (2 * s + 1) ** (dim - 1) * 2 * dim * np.exp(-rate * s)
        tail += shell
        if shell < 1e-16 * max(tail, 1.0) or s > radius + 200:
            break
        s += 1
    return StencilField(dim, offsets, coeffs, decay_rate=rate, truncation_tail_mass=tail)
