"""Subspaces and flags of R^n with tolerance-aware sums and intersections.

Subspaces are stored by an orthonormal basis; comparisons always go through
principal angles or projectors, never through basis entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionOverflow, MixedAmbient, RankDeficient

DIRECT_TOL = 1e-7
ANGLE_TOL = 1e-6
RANK_RTOL = 1e-10
MAX_AMBIENT = 16


@dataclass(frozen=True, eq=False)
class Subspace:
    """A k-plane in R^n given by an n x k orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2d array")
        if b.shape[0] > MAX_AMBIENT:
            raise ValueError(f"ambient dimension {b.shape[0]} exceeds {MAX_AMBIENT}")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def complement(self) -> "Subspace":
        """Orthogonal complement."""
        n, k = self.basis.shape
        if k == 0:
            return Subspace(np.eye(n))
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(u[:, k:])

    def transform(self, m: np.ndarray) -> "Subspace":
        """Image under an invertible linear map."""
        if self.dim == 0:
            return self
        return orthonormalize(np.asarray(m) @ self.basis)

    def to_json(self) -> dict:
        return {"n": self.ambient_dim, "dim": self.dim, "basis": self.basis.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Subspace":
        n, k = int(data["n"]), int(data["dim"])
        basis = np.array(data["basis"], dtype=float).reshape(n, k)
        return orthonormalize(basis) if k else cls(np.zeros((n, 0)))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    def __repr__(self):
        return f"Subspace(n={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True)
class SumResult:
    total_dim: int
    margin: float
    is_direct: bool


def orthonormalize(vectors, rtol: float = RANK_RTOL) -> Subspace:
    """Orthonormal basis of the column space, keeping the column order nested.

    Column j of the result lies in the span of the first j+1 input columns,
    so a frame with nested partial spans stays nested.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    n, k = v.shape
    if k > n:
        raise RankDeficient(f"{k} vectors in R^{n}")
    if k == 0:
        return Subspace(np.zeros((n, 0)))
    s = np.linalg.svd(v, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= rtol * s[0]:
        raise RankDeficient(f"numerical rank below {k} (sigma_min/sigma_max={s[-1] / max(s[0], 1e-300):.3e})")
    q, r = np.linalg.qr(v)
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return Subspace(q)


def _check_ambient(parts):
    dims = {p.ambient_dim for p in parts}
    if len(dims) > 1:
        raise MixedAmbient(f"ambient dimensions differ: {sorted(dims)}")
    return dims.pop() if dims else 0


def subspace_sum(parts, tol: float = DIRECT_TOL) -> SumResult:
    """Directness margin of a sum: smallest singular value of the stacked bases."""
    parts = list(parts)
    n = _check_ambient(parts)
    total = sum(p.dim for p in parts)
    if total > n:
        raise DimensionOverflow(f"dimensions sum to {total} > {n}")
    if total == 0:
        return SumResult(0, 1.0, True)
    stacked = np.hstack([p.basis for p in parts])
    margin = float(np.linalg.svd(stacked, compute_uv=False)[-1])
    margin = min(max(margin, 0.0), 1.0)
    return SumResult(total, margin, margin > tol)


def span(parts) -> Subspace:
    """Span of a direct sum (raises RankDeficient when it is not direct)."""
    parts = list(parts)
    n = _check_ambient(parts)
    if not parts:
        raise ValueError("empty sum")
    return orthonormalize(np.hstack([p.basis for p in parts]))


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    """Ascending principal angles, min(dim a, dim b) of them.

    Small angles come from sines (accurate near 0), large ones from cosines.
    """
    _check_ambient([a, b])
    if a.dim > b.dim:
        a, b = b, a
    if a.dim == 0:
        return np.zeros(0)
    cos = np.clip(np.linalg.svd(a.basis.T @ b.basis, compute_uv=False), 0.0, 1.0)
    resid = a.basis - b.basis @ (b.basis.T @ a.basis)
    sin = np.clip(np.sort(np.linalg.svd(resid, compute_uv=False)), 0.0, 1.0)
    ang_cos = np.arccos(cos)  # ascending
    ang_sin = np.arcsin(sin)  # ascending
    return np.where(ang_cos < np.pi / 4, ang_sin, ang_cos)


def subspace_intersection(a: Subspace, b: Subspace, angle_tol: float = ANGLE_TOL) -> Subspace:
    """Numerical intersection: principal vectors whose angle is below angle_tol."""
    _check_ambient([a, b])
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    u, s, vt = np.linalg.svd(a.basis.T @ b.basis)
    angles = principal_angles(a, b)
    m = int(np.sum(angles < angle_tol))
    if m == 0:
        return Subspace.zero(a.ambient_dim)
    pa = a.basis @ u[:, :m]
    pb = b.basis @ vt.T[:, :m]
    return orthonormalize(pa + pb)


def forced_intersection(a: Subspace, b: Subspace) -> tuple[Subspace, float]:
    """Intersection of two transverse subspaces, of dimension dim a + dim b - n.

    Returns the intersection and the transversality margin (smallest nonzero
    singular value of the defining system); a margin near zero means a and b
    are not transverse and the result is meaningless.
    """
    n = _check_ambient([a, b])
    m = a.dim + b.dim - n
    if m <= 0:
        raise ValueError(f"dimensions {a.dim} + {b.dim} do not force an intersection in R^{n}")
    if b.dim == n:
        return a, 1.0
    if a.dim == n:
        return b, 1.0
    # vectors of a killed by the projection onto the complement of b
    system = b.complement().basis.T @ a.basis
    _, s, vt = np.linalg.svd(system, full_matrices=True)
    margin = float(s[-1]) if s.size else 1.0
    return orthonormalize(a.basis @ vt[a.dim - m:].T), margin


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Largest principal angle (0 for equal subspaces, pi/2 when orthogonal directions exist)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")
    ang = principal_angles(a, b)
    return float(ang[-1]) if ang.size else 0.0


@dataclass(frozen=True, eq=False)
class FlagChain:
    """Full flag: levels[k-1] is the k-dimensional member, k = 1..n-1."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("a flag needs at least one level")
        n = levels[0].ambient_dim
        for k, lev in enumerate(levels, start=1):
            if lev.ambient_dim != n or lev.dim != k:
                raise ValueError(f"level {k} has shape ({lev.ambient_dim}, {lev.dim})")
        if len(levels) != n - 1:
            raise ValueError(f"expected {n - 1} levels, got {len(levels)}")
        for lo, hi in zip(levels, levels[1:]):
            resid = lo.basis - hi.basis @ (hi.basis.T @ lo.basis)
            if np.abs(resid).max() >= 1e-10:
                raise ValueError("flag levels are not nested")

    @classmethod
    def from_frame(cls, frame) -> "FlagChain":
        """Flag whose level k is spanned by the first k columns of an invertible frame."""
        q = orthonormalize(frame).basis
        n = q.shape[0]
        return cls(tuple(Subspace(q[:, :k]) for k in range(1, n)))

    @property
    def ambient_dim(self) -> int:
        return self.levels[0].ambient_dim

    def level(self, k: int) -> Subspace:
        """Level k, with level 0 the zero space and level n the whole space."""
        n = self.ambient_dim
        if k == 0:
            return Subspace.zero(n)
        if k == n:
            return Subspace.full(n)
        return self.levels[k - 1]

    def frame(self) -> np.ndarray:
        """Orthonormal frame whose first k columns span level k."""
        cols = []
        for lev in self.levels:
            b = lev.basis
            if cols:
                q = np.column_stack(cols)
                b = b - q @ (q.T @ b)
            # the new direction is the dominant left singular vector of the residual
            u, _, _ = np.linalg.svd(b, full_matrices=False)
            cols.append(u[:, 0])
        cols.append(self.levels[-1].complement().basis[:, 0])
        return np.column_stack(cols)

    def line(self) -> np.ndarray:
        """Unit vector spanning level 1."""
        return self.levels[0].basis[:, 0]

    def hyperplane_form(self) -> np.ndarray:
        """Unit linear form whose kernel is level n-1."""
        return self.levels[-1].complement().basis[:, 0]

    def transform(self, m) -> "FlagChain":
        return FlagChain.from_frame(np.asarray(m) @ self.frame())

    def to_json(self) -> dict:
        return {"n": self.ambient_dim, "levels": [lev.to_json() for lev in self.levels]}

    @classmethod
    def from_json(cls, data: dict) -> "FlagChain":
        levels = [Subspace.from_json(d) for d in data["levels"]]
        if int(data["n"]) != levels[0].ambient_dim:
            raise ValueError("ambient dimension mismatch in flag json")
        return cls(tuple(levels))

    def __repr__(self):
        return f"FlagChain(n={self.ambient_dim})"


def flag_distance(f: FlagChain, g: FlagChain) -> float:
    """Max over levels of the largest principal angle."""
    if f.ambient_dim != g.ambient_dim:
        raise MixedAmbient(f"flags live in R^{f.ambient_dim} and R^{g.ambient_dim}")
    return max(subspace_distance(a, b) for a, b in zip(f.levels, g.levels))
