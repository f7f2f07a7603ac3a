"""Sampled complex fields on the unit lattice (rectangular windows).

A Field stores samples of a function on spacing*Z^n restricted to the cube
[-radius, radius]^n, together with an optional exact point evaluator and an
optional frequency-side evaluator.  Unit-lattice L2 sums are exact for
functions whose Fourier support has diameter < 1 (Poisson summation), which
covers every per-box field here; whole-sleeve fields carry an O(1/R)
endpoint-aliasing error that only monitors ever see.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class DomainError(Exception):
    """Grid does not cover the requested region."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    radius: float
    spacing: float = 1.0

    @property
    def half_count(self) -> int:
        return int(np.floor(self.radius / self.spacing + 1e-9))

    def axis(self) -> np.ndarray:
        k = self.half_count
        return np.arange(-k, k + 1) * self.spacing

    @property
    def shape(self) -> tuple[int, ...]:
        return (2 * self.half_count + 1,) * self.n

    def points(self) -> np.ndarray:
        """All grid points, shape (prod(shape), n)."""
        ax = self.axis()
        grids = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def cell_volume(self) -> float:
        return self.spacing**self.n


@dataclass
class Field:
    grid: GridSpec
    values: np.ndarray
    # exact evaluator at arbitrary points (used by weighted energies)
    source: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    # frequency-side evaluator fhat(xi) for decompose-grade quadrature
    spectrum: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.grid.n

    def l2sq(self, within: Optional[float] = None) -> float:
        """Lattice L2^2 (times the cell volume); optionally restricted to the
        ball |x| <= within."""
        v2 = np.abs(self.values.ravel()) ** 2
        if within is not None:
            pts = self.grid.points()
            v2 = v2[(pts**2).sum(axis=1) <= within**2 + 1e-9]
        return float(v2.sum() * self.grid.cell_volume())

    def lp_p(self, p: float, within: Optional[float] = None) -> float:
        vp = np.abs(self.values.ravel()) ** p
        if within is not None:
            pts = self.grid.points()
            vp = vp[(pts**2).sum(axis=1) <= within**2 + 1e-9]
        return float(vp.sum() * self.grid.cell_volume())

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def at(self, points: np.ndarray) -> np.ndarray:
        """Values at the given points: exact via source when available,
        otherwise by grid lookup (points must be grid points; outside the
        window the field counts as 0)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.source is not None:
            return self.source(points)
        k = self.grid.half_count
        idx = np.rint(points / self.grid.spacing).astype(np.int64)
        if np.max(np.abs(idx * self.grid.spacing - points)) > 1e-6:
            raise DomainError("requested points are not grid points and no evaluator is attached")
        out = np.zeros(len(points), dtype=complex)
        inside = np.all(np.abs(idx) <= k, axis=1)
        flat = self.values.reshape(-1)
        if inside.any():
            shifted = idx[inside] + k
            lin = np.ravel_multi_index(tuple(shifted.T), self.grid.shape)
            out[inside] = flat[lin]
        return out

    # -- serialization ------------------------------------------------------

    MAGIC = b"MTF1"

    def to_binary(self) -> bytes:
        head = struct.pack("<4sidd", self.MAGIC, self.grid.n, self.grid.radius, self.grid.spacing)
        return head + np.ascontiguousarray(self.values, dtype=np.complex64).tobytes()

    @classmethod
    def from_binary(cls, blob: bytes) -> "Field":
        n, radius, spacing = struct.unpack("<idd", blob[4:24])
        if blob[:4] != cls.MAGIC:
            raise ValueError("bad field header")
        grid = GridSpec(n=n, radius=radius, spacing=spacing)
        vals = np.frombuffer(blob[24:], dtype=np.complex64).astype(complex)
        return cls(grid=grid, values=vals.reshape(grid.shape))

    def to_csv(self, path) -> None:
        pts = self.grid.points()
        vals = self.values.ravel()
        cols = [pts[:, j] for j in range(self.n)] + [vals.real, vals.imag]
        header = ",".join([f"x{j+1}" for j in range(self.n)] + ["re", "im"])
        np.savetxt(path, np.stack(cols, axis=-1), delimiter=",", header=header, comments="")


def field_from_evaluator(
    grid: GridSpec,
    evaluator: Callable[[np.ndarray], np.ndarray],
    spectrum: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    chunk: int = 1 << 18,
) -> Field:
    pts = grid.points()
    vals = np.empty(len(pts), dtype=complex)
    for i0 in range(0, len(pts), chunk):
        vals[i0 : i0 + chunk] = evaluator(pts[i0 : i0 + chunk])
    return Field(grid=grid, values=vals.reshape(grid.shape), source=evaluator, spectrum=spectrum)


def zero_field(grid: GridSpec) -> Field:
    return Field(grid=grid, values=np.zeros(grid.shape, dtype=complex))
