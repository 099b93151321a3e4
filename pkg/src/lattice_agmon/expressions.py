"""Closed-form coefficient fields backed by sympy expression trees.

Stencil coefficients and potentials are specified as arithmetic expressions in
the coordinates x1..xd (`x` is accepted as an alias in one dimension).  Keeping
them symbolic gives exact x-derivatives and Taylor data, which the Hamiltonian
flow and the eikonal expansion rely on.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations, convert_xor

_TRANSFORMS = standard_transformations + (convert_xor,)

_ALLOWED_FUNCTIONS = {
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "cos": sp.cos,
    "sin": sp.sin,
    "tan": sp.tan,
    "cosh": sp.cosh,
    "sinh": sp.sinh,
    "tanh": sp.tanh,
    "Abs": sp.Abs,
    "abs": sp.Abs,
    "sign": sp.sign,
    "pi": sp.pi,
    "Min": sp.Min,
    "Max": sp.Max,
}


class ExpressionError(ValueError):
    """Raised when a coefficient expression cannot be parsed or uses foreign symbols."""


def coordinates(dim: int):
    """The canonical coordinate symbols x1..xd."""
    return sp.symbols(f"x1:{dim + 1}", real=True)


def parse_scalar(text, dim: int) -> sp.Expr:
    """Parse an arithmetic expression (operators + - * / ^, whitelisted functions)."""
    xs = coordinates(dim)
    local = dict(_ALLOWED_FUNCTIONS)
    local.update({s.name: s for s in xs})
    if dim == 1:
        local["x"] = xs[0]
    try:
        expr = parse_expr(str(text), local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except Exception as exc:  # sympy raises a zoo of exception types here
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from exc
    stray = expr.free_symbols - set(xs)
    if stray:
        raise ExpressionError(f"expression {text!r} uses unknown symbols {sorted(map(str, stray))}")
    return expr


class ScalarField:
    """A scalar function of x in R^d with symbolic derivatives.

    Accepts a string, a sympy expression or a plain number.  Evaluation is
    vectorized over trailing point batches of shape (..., d).
    """

    def __init__(self, expr, dim: int):
        self.dim = int(dim)
        self.vars = coordinates(self.dim)
        if isinstance(expr, ScalarField):
            expr = expr.expr
        if isinstance(expr, str):
            expr = parse_scalar(expr, self.dim)
        self.expr = sp.sympify(expr)
        stray = self.expr.free_symbols - set(self.vars)
        if stray:
            raise ExpressionError(f"field uses unknown symbols {sorted(map(str, stray))}")
        self._fn = sp.lambdify(self.vars, self.expr, modules="numpy")
        self._grad = None

    def __call__(self, x):
        pts = np.asarray(x, dtype=float)
        if self.dim == 1 and pts.ndim == 0:
            pts = pts.reshape(1)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[-1]}, field has {self.dim}")
        args = [pts[..., i] for i in range(self.dim)]
        out = self._fn(*args)
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:-1]).copy()

    def at(self, x) -> float:
        """Scalar evaluation at a single point."""
        return float(self(np.asarray(x, dtype=float).reshape(self.dim)))

    def diff(self, axis: int) -> "ScalarField":
        return ScalarField(sp.diff(self.expr, self.vars[axis]), self.dim)

    def gradient(self):
        """Per-axis derivative fields, cached."""
        if self._grad is None:
            self._grad = tuple(self.diff(i) for i in range(self.dim))
        return self._grad

    def gradient_at(self, x):
        return np.array([g(np.asarray(x, float).reshape(1, self.dim))[0] for g in self.gradient()])

    def hessian_at(self, x) -> np.ndarray:
        xs = self.vars
        pt = dict(zip(xs, np.asarray(x, float).reshape(self.dim)))
        h = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(i, self.dim):
                h[i, j] = h[j, i] = float(sp.diff(self.expr, xs[i], xs[j]).subs(pt))
        return h

    def taylor_coefficients(self, max_degree: int, center=None) -> dict:
        """Taylor coefficients {multi-index: c} of the field around `center` (default 0).

        Requires the expression to be smooth at the center; Abs/sign kinks are
        rejected by sympy when differentiated there.
        """
        center = np.zeros(self.dim) if center is None else np.asarray(center, float)
        pt = dict(zip(self.vars, center))
        coeffs = {}
        for degree in range(max_degree + 1):
            for alpha in multi_indices(self.dim, degree):
                deriv = self.expr
                for i, a in enumerate(alpha):
                    if a:
                        deriv = sp.diff(deriv, self.vars[i], a)
                value = complex(sp.nsimplify(deriv.subs(pt), rational=False).evalf())
                if abs(value.imag) > 1e-12:
                    raise ExpressionError(f"complex Taylor coefficient at {alpha}")
                c = value.real / math.prod(math.factorial(a) for a in alpha)
                if c != 0.0:
                    coeffs[tuple(alpha)] = c
        return coeffs

    def __repr__(self):
        return f"ScalarField({self.expr}, dim={self.dim})"


def multi_indices(dim: int, degree: int):
    """All multi-indices alpha in N^dim with |alpha| = degree."""
    if dim == 1:
        yield (degree,)
        return
    for head in range(degree + 1):
        for tail in multi_indices(dim - 1, degree - head):
            yield (head,) + tail


def constant_field(value: float, dim: int) -> ScalarField:
    return ScalarField(sp.Float(value), dim)


def sample_grid(box, n_per_axis: int) -> np.ndarray:
    """Regular sample grid over a box [(lo, hi), ...], shape (n^d, d)."""
    axes = [np.linspace(lo, hi, n_per_axis) for lo, hi in box]
    return np.array(list(itertools.product(*axes)))
