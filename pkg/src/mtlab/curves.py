"""Well-curved curves and their Serret-Frenet frames.

A curve is specified by a derivative oracle: d_j(xi) returns the j-th
derivative, j = 0..n+1.  Well-curvedness means the derivative wedge
|det(G', ..., G^(n))| stays above a positive floor on the parameter
interval; the moment curve (xi, xi^2, ..., xi^n) is the model case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np


class WellCurvedViolation(Exception):
    """Derivative wedge degenerate at a parameter."""


@dataclass(frozen=True)
class CurveSpec:
    """A parametrized curve with derivatives up to order n+1.

    derivative(j, xi) must accept scalar or vector xi and return an array of
    shape xi.shape + (n,).
    """

    n: int
    derivative: Callable[[int, np.ndarray], np.ndarray]
    interval: tuple[float, float] = (0.0, 1.0)
    wellcurved_floor: float = 0.1
    name: str = "curve"
    # sup over the interval of |G^(j)| for j=1..n+1, filled at construction
    deriv_bounds: tuple[float, ...] = field(default=(), compare=False)

    def point(self, xi):
        return self.derivative(0, np.asarray(xi, dtype=float))

    def deriv(self, j: int, xi):
        return self.derivative(j, np.asarray(xi, dtype=float))

    def wedge(self, xi: float) -> float:
        """|det(G'(xi), ..., G^(n)(xi))|."""
        cols = np.stack([self.deriv(j, xi) for j in range(1, self.n + 1)], axis=-1)
        return float(abs(np.linalg.det(cols)))

    def check_wellcurved(self, xi: float) -> None:
        if self.wedge(xi) < self.wellcurved_floor:
            raise WellCurvedViolation(
                f"wedge {self.wedge(xi):.3e} below floor {self.wellcurved_floor} at xi={xi}"
            )

    def max_speed(self) -> float:
        """sup |G'| over the interval, by a fine sample."""
        xs = np.linspace(self.interval[0], self.interval[1], 4097)
        d1 = self.deriv(1, xs)
        return float(np.max(np.linalg.norm(d1, axis=-1)))


def moment_curve(n: int) -> CurveSpec:
    """G(xi) = (xi, xi^2, ..., xi^n); the j-th derivative of xi^k is
    k!/(k-j)! xi^(k-j)."""

    def deriv(j: int, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape + (n,))
        for k in range(1, n + 1):
            if j <= k:
                c = factorial(k) // factorial(k - j)
                out[..., k - 1] = c * xi ** (k - j)
        return out

    # wedge = prod_{k=1..n} k!  (constant), floor set just below it
    wedge = 1.0
    for k in range(1, n + 1):
        wedge *= factorial(k)
    bounds = tuple(
        float(np.sqrt(sum((factorial(k) / factorial(max(k - j, 0))) ** 2 for k in range(max(j, 1), n + 1))))
        for j in range(1, n + 2)
    )
    return CurveSpec(
        n=n,
        derivative=deriv,
        wellcurved_floor=0.9 * wedge,
        name=f"moment{n}",
        deriv_bounds=bounds,
    )


def sine_curve_3d() -> CurveSpec:
    """G(xi) = (xi, sin xi, cos xi - 1) on [0,1]; wedge = 1 identically and
    |G'| = sqrt(2) uniformly, which keeps all frame constants tame."""

    def deriv(j: int, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape + (3,))
        if j == 0:
            out[..., 0] = xi
            out[..., 1] = np.sin(xi)
            out[..., 2] = np.cos(xi) - 1.0
            return out
        out[..., 0] = 1.0 if j == 1 else 0.0
        # d^j sin = sin(xi + j pi/2), d^j cos = cos(xi + j pi/2)
        out[..., 1] = np.sin(xi + j * np.pi / 2)
        out[..., 2] = np.cos(xi + j * np.pi / 2)
        return out

    return CurveSpec(
        n=3,
        derivative=deriv,
        wellcurved_floor=0.9,
        name="sine3",
        deriv_bounds=(np.sqrt(2.0),) * 4,
    )


_REGISTRY: dict[str, Callable[[int], CurveSpec]] = {}


def get_curve(name: str, n: int) -> CurveSpec:
    if name == "moment":
        return moment_curve(n)
    if name == "sine3":
        if n != 3:
            raise ValueError("sine3 is a 3-dimensional curve")
        return sine_curve_3d()
    raise ValueError(f"unknown curve {name!r}")


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal frame at a point of the curve; vectors are the rows of e."""

    xi: float
    e: np.ndarray  # shape (n, n), row j-1 = e_j

    @property
    def tangent(self) -> np.ndarray:
        return self.e[0]

    @property
    def final(self) -> np.ndarray:
        return self.e[-1]

    def orthonormality_residual(self) -> float:
        g = self.e @ self.e.T
        return float(np.max(np.abs(g - np.eye(len(g)))))


def frenet_frame(curve: CurveSpec, t: float) -> FrenetFrame:
    """Gram-Schmidt of (G'(t), ..., G^(n)(t)) with the sign convention that
    each e_j has positive inner product with G^(j)."""
    lo, hi = curve.interval
    if not (lo <= t <= hi):
        raise ValueError(f"t={t} outside parameter interval {curve.interval}")
    curve.check_wellcurved(t)
    n = curve.n
    cols = np.stack([curve.deriv(j, t) for j in range(1, n + 1)], axis=1)  # (n, n)
    q, r = np.linalg.qr(cols)
    # enforce positive diagonal of r, i.e. <e_j, G^(j)> > 0 after projection
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    e = (q * signs[None, :]).T
    return FrenetFrame(xi=float(t), e=e)
