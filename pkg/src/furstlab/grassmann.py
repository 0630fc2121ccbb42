"""Grassmannian G(n,k) and affine Grassmannian A(n,k) with projector metrics.

A k-dimensional subspace of R^n is stored as an orthonormal basis; all
comparisons go through the orthogonal projector P = B B^T, which is canonical
(independent of the basis choice).  The distance between subspaces is the
operator norm of the projector difference, which equals the sine of the
largest principal angle.  Affine flats carry the subspace plus the unique
offset vector orthogonal to it, and their distance adds the Euclidean offset
gap to the subspace distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tolerances import TOL_EXACT

MAX_AMBIENT_DIM = 16


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^n with an orthonormal basis.

    basis has shape (n, k) with orthonormal columns.  Equality of subspaces
    means equality of projectors, not of bases.
    """

    n: int
    k: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (1 <= self.k <= self.n):
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > MAX_AMBIENT_DIM:
            raise ValueError(f"ambient dimension capped at {MAX_AMBIENT_DIM}")
        b = np.asarray(self.basis, dtype=float)
        if b.shape != (self.n, self.k):
            raise ValueError(f"basis shape {b.shape} != ({self.n}, {self.k})")
        gram = b.T @ b
        if not np.allclose(gram, np.eye(self.k), atol=TOL_EXACT):
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_spanning(cls, vectors) -> "Subspace":
        """Orthonormalize spanning vectors (columns) into a Subspace."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.ndim != 2:
            raise ValueError("expected a matrix of column vectors")
        q, r = np.linalg.qr(v)
        rank = int((np.abs(np.diag(r)) > 1e-12).sum())
        if rank < v.shape[1]:
            raise ValueError("spanning vectors are linearly dependent")
        return cls(v.shape[0], v.shape[1], q)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, x) -> np.ndarray:
        """Orthogonal projection of x onto the subspace."""
        x = np.asarray(x, dtype=float)
        return self.basis @ (self.basis.T @ x)

    def coordinates(self, x) -> np.ndarray:
        """Coordinates of the projection of x in the orthonormal basis."""
        return self.basis.T @ np.asarray(x, dtype=float)

    def complement_basis(self) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement, shape (n, n-k)."""
        # Full QR of the basis: trailing columns span the complement.
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return q[:, self.k:]


@dataclass(frozen=True)
class AffineFlat:
    """An affine k-flat U + a with a orthogonal to U."""

    direction: Subspace
    offset: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.offset, dtype=float)
        if a.shape != (self.direction.n,):
            raise ValueError(f"offset shape {a.shape} != ({self.direction.n},)")
        if np.linalg.norm(self.direction.project(a)) > TOL_EXACT:
            raise ValueError("offset is not orthogonal to the direction")
        object.__setattr__(self, "offset", a)

    @classmethod
    def through(cls, direction: Subspace, point) -> "AffineFlat":
        """The flat with the given direction passing through `point`.

        The translation vector is re-orthogonalized: U + a = U + (a - proj_U a).
        """
        point = np.asarray(point, dtype=float)
        return cls(direction, point - direction.project(point))

    @property
    def n(self) -> int:
        return self.direction.n

    @property
    def k(self) -> int:
        return self.direction.k

    def point_at(self, coords) -> np.ndarray:
        """The flat point offset + basis @ coords."""
        return self.offset + self.direction.basis @ np.asarray(coords, dtype=float)


@dataclass(frozen=True)
class Rotation:
    """An orthogonal n x n matrix."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("rotation matrix must be square")
        if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=TOL_EXACT):
            raise ValueError("matrix is not orthogonal")
        det = np.linalg.det(m)
        if min(abs(det - 1.0), abs(det + 1.0)) > 1e-6:
            raise ValueError("determinant is not +-1")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


def haar_sample(n: int, k: int, seed=None) -> Subspace:
    """Draw a uniform (Haar) random k-subspace of R^n.

    Orthonormalizes an n x k matrix of independent standard normals; the
    rotational invariance of the Gaussian makes the column span uniform on
    the Grassmannian.  Deterministic for a fixed seed.
    """
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    g = rng.standard_normal((n, k))
    q, r = np.linalg.qr(g)
    # Sign-fix for a canonical representative; the span is unaffected.
    q = q * np.sign(np.diag(r))
    return Subspace(n, k, q)


def haar_projector_batch(n: int, k: int, count: int, seed=None) -> np.ndarray:
    """Stack of `count` Haar-random orthonormal bases, shape (count, n, k)."""
    rng = _rng(seed)
    g = rng.standard_normal((count, n, k))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.einsum("...ii->...i", r))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _check_same_shape(u: Subspace, v: Subspace):
    if (u.n, u.k) != (v.n, v.k):
        raise ValueError(f"dimension mismatch: ({u.n},{u.k}) vs ({v.n},{v.k})")


def grass_distance(u: Subspace, v: Subspace) -> float:
    """Operator-norm distance ||P_U - P_V|| between equal-dimension subspaces.

    Computed as the largest singular value of the projector difference; for
    equal dimensions this equals sin(theta_max) of the principal angles, and
    lies in [0, 1].
    """
    _check_same_shape(u, v)
    diff = u.projector() - v.projector()
    s = np.linalg.svd(diff, compute_uv=False)
    return float(min(max(s[0], 0.0), 1.0))


def affine_distance(w: AffineFlat, w2: AffineFlat) -> float:
    """Subspace distance of the directions plus the offset gap."""
    d = grass_distance(w.direction, w2.direction)
    return d + float(np.linalg.norm(w.offset - w2.offset))


def project_point(w: AffineFlat, x) -> np.ndarray:
    """Euclidean-nearest point of the flat to x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (w.n,):
        raise ValueError(f"point shape {x.shape} != ({w.n},)")
    return w.offset + w.direction.project(x)


def min_rotation(u: Subspace, v: Subspace) -> Rotation:
    """Direct rotation R with R(span U) = span V and minimal ||I - R||.

    Built from the SVD of V^T U: the principal vector pairs (a_i, b_i) are
    rotated within their mutually orthogonal 2-planes by the principal
    angles, and the common orthogonal complement is fixed pointwise.  The
    resulting operator norm is ||I - R|| = 2 sin(theta_max / 2), which is at
    most sqrt(2) * sin(theta_max) = sqrt(2) * grass_distance(U, V) since the
    principal angles lie in [0, pi/2].
    """
    _check_same_shape(u, v)
    n, k = u.n, u.k
    m = v.basis.T @ u.basis
    y, sigma, zt = np.linalg.svd(m)
    a = u.basis @ zt.T          # principal vectors in U
    b = v.basis @ y             # principal vectors in V, a_i . b_j = delta_ij cos(theta_i)
    r = np.eye(n)
    for i in range(k):
        cos_t = min(max(float(sigma[i]), -1.0), 1.0)
        w_raw = b[:, i] - cos_t * a[:, i]
        sin_t = float(np.linalg.norm(w_raw))
        if sin_t <= TOL_EXACT:
            continue
        w = w_raw / sin_t
        ai = a[:, i]
        r += (cos_t - 1.0) * (np.outer(ai, ai) + np.outer(w, w))
        r += sin_t * (np.outer(w, ai) - np.outer(ai, w))
    return Rotation(r)


def sample_subflat(w: AffineFlat, k2: int, r: float, seed=None) -> AffineFlat:
    """A Haar-random k2-flat contained in the flat w and meeting B(0, r).

    Rejection-samples a direction within w's direction and a base point on w
    until the nearest point of the sampled flat to the origin has norm <= r.
    """
    if k2 >= w.k:
        raise ValueError(f"need k2 < flat dimension, got k2={k2}, k={w.k}")
    if k2 < 1:
        raise ValueError("k2 must be >= 1")
    if r <= 0:
        raise ValueError("r must be positive")
    if np.linalg.norm(w.offset) > r:
        raise ValueError("the flat itself does not meet B(0, r)")
    rng = _rng(seed)
    for _ in range(10000):
        g = rng.standard_normal((w.k, k2))
        q, _ = np.linalg.qr(g)
        direction = Subspace(w.n, k2, w.direction.basis @ q)
        base = w.point_at(rng.uniform(-r, r, size=w.k))
        flat = AffineFlat.through(direction, base)
        if np.linalg.norm(flat.offset) <= r:
            return flat
    raise RuntimeError("rejection sampling failed to meet B(0, r)")


def _grass_distance_to_batch(u: Subspace, bases: np.ndarray) -> np.ndarray:
    """Distances from u to a stack of same-shape bases, via sin(theta_max).

    For equal dimensions ||P_U - P_V|| = sqrt(1 - sigma_min(U^T V)^2), so one
    small batched SVD replaces per-sample projector differences.
    """
    m = np.matmul(np.swapaxes(bases, -1, -2), u.basis)
    s = np.linalg.svd(m, compute_uv=False)
    smin = np.clip(s[..., -1], -1.0, 1.0)
    return np.sqrt(np.maximum(0.0, 1.0 - smin * smin))


def ball_measure_estimate(u: Subspace, delta: float, samples: int, seed=None) -> float:
    """Monte Carlo estimate of the Haar measure of the ball B(U, delta).

    Fraction of haar_sample draws within grass_distance delta of U.
    Deterministic for a fixed seed; draws are processed in chunks.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = _rng(seed)
    hits = 0
    remaining = samples
    chunk = 1 << 16
    while remaining > 0:
        m = min(chunk, remaining)
        bases = haar_projector_batch(u.n, u.k, m, rng)
        d = _grass_distance_to_batch(u, bases)
        hits += int((d <= delta).sum())
        remaining -= m
    return hits / samples
