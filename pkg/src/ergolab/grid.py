"""Uniform grid partitions of a phase space (row-major cell indexing)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .systems import Space


@dataclass(frozen=True)
class GridPartition:
    space: Space
    shape: tuple[int, ...]

    @classmethod
    def of(cls, space: Space, m) -> "GridPartition":
        shape = (int(m),) * space.dim if np.isscalar(m) else tuple(int(v) for v in m)
        if len(shape) != space.dim:
            raise ValueError(f"resolution {m!r} does not match dimension {space.dim}")
        if min(shape) < 1:
            raise ValueError("resolution must be positive")
        return cls(space, shape)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def widths(self) -> np.ndarray:
        return 1.0 / np.asarray(self.shape, dtype=float)

    @cached_property
    def _strides(self) -> np.ndarray:
        s = [1] * self.dim
        for i in range(self.dim - 2, -1, -1):
            s[i] = s[i + 1] * self.shape[i + 1]
        return np.asarray(s, dtype=np.int64)

    def multi_of(self, points) -> np.ndarray:
        """Integer cell coordinates of points, shape (n, d)."""
        p = np.asarray(points, dtype=float).reshape(-1, self.dim)
        shape = np.asarray(self.shape)
        idx = np.floor(p * shape).astype(np.int64)
        per = np.asarray(self.space.periodic)
        wrapped = np.mod(idx, shape)
        clipped = np.clip(idx, 0, shape - 1)
        return np.where(per, wrapped, clipped)

    def ravel(self, multi) -> np.ndarray:
        return np.asarray(multi, dtype=np.int64).reshape(-1, self.dim) @ self._strides

    def unravel(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64).ravel()
        return np.stack(np.unravel_index(idx, self.shape), axis=-1).astype(np.int64)

    def cell_of(self, points) -> np.ndarray:
        return self.ravel(self.multi_of(points))

    def lower_corners(self, idx=None) -> np.ndarray:
        if idx is None:
            idx = np.arange(self.n_cells)
        return self.unravel(idx) * self.widths

    def midpoints(self, idx=None) -> np.ndarray:
        """Cell midpoints, shape (n,) in 1-D and (n, d) otherwise."""
        mids = self.lower_corners(idx) + 0.5 * self.widths
        return mids[:, 0] if self.dim == 1 else mids

    def dilate(self, multi: np.ndarray, radius: int) -> np.ndarray:
        """All cells within Chebyshev distance ``radius`` of each row of ``multi``.

        Returns shape (n, (2r+1)^d) of flat indices; wraps on circle factors
        and clips on interval factors.
        """
        multi = np.asarray(multi, dtype=np.int64).reshape(-1, self.dim)
        if radius == 0:
            return self.ravel(multi)[:, None]
        offs = np.stack(np.meshgrid(*[np.arange(-radius, radius + 1)] * self.dim, indexing="ij"), -1)
        offs = offs.reshape(-1, self.dim)
        cand = multi[:, None, :] + offs[None, :, :]
        shape = np.asarray(self.shape)
        per = np.asarray(self.space.periodic)
        cand = np.where(per, np.mod(cand, shape), np.clip(cand, 0, shape - 1))
        return (cand.reshape(-1, self.dim) @ self._strides).reshape(len(multi), -1)

    def cell_distance(self, a, b) -> np.ndarray:
        """Chebyshev distance in cells between flat indices, wrap-aware."""
        ma, mb = self.unravel(a), self.unravel(b)
        d = np.abs(ma - mb)
        shape = np.asarray(self.shape)
        per = np.asarray(self.space.periodic)
        d = np.where(per, np.minimum(d, shape - d), d)
        return d.max(axis=-1)
