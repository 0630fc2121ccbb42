"""Exact Kakeya / spread-Furstenberg combinatorics over F_q^n, q prime.

Subspaces are kept in reduced row-echelon form so that subspace identity is
representation identity, which keeps the exhaustive loops cheap.  Cosets of
a k-subspace are labeled by a canonical representative obtained by zeroing
the pivot coordinates, so coset bookkeeping is a dictionary over tuples.

Only prime q is accepted: over proper prime powers the subfield structure
breaks the size conjectures this module is used to probe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

Point = Tuple[int, ...]

MAX_DIRECTIONS = 10 ** 6
EXHAUSTIVE_POINT_CAP = 16


class SearchBudgetExceeded(RuntimeError):
    """An exhaustive search exceeded its node budget."""


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


def _require_prime(q: int):
    if not is_prime(q):
        raise ValueError(f"q must be prime, got {q}")


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-subspaces of F_q^n, as an exact integer."""
    if not (0 <= k <= n):
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    num = 1
    den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@dataclass(frozen=True)
class FFSubspace:
    """A k-subspace of F_q^n given by its canonical RREF basis (k x n)."""

    q: int
    n: int
    k: int
    basis: Tuple[Point, ...]

    def __post_init__(self):
        _require_prime(self.q)
        b = tuple(tuple(int(v) % self.q for v in row) for row in self.basis)
        if len(b) != self.k or any(len(r) != self.n for r in b):
            raise ValueError("basis shape mismatch")
        if not self._is_canonical_rref(b):
            raise ValueError("basis is not in canonical RREF")
        object.__setattr__(self, "basis", b)

    def _is_canonical_rref(self, rows) -> bool:
        last_pivot = -1
        for row in rows:
            pivot = next((j for j, v in enumerate(row) if v != 0), None)
            if pivot is None or pivot <= last_pivot or row[pivot] != 1:
                return False
            if any(other[pivot] != 0 for other in rows if other is not row):
                return False
            last_pivot = pivot
        return True

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(next(j for j, v in enumerate(row) if v != 0) for row in self.basis)

    @classmethod
    def from_rows(cls, q: int, rows: Iterable[Point]) -> "FFSubspace":
        """Row-reduce arbitrary spanning rows into the canonical subspace."""
        _require_prime(q)
        mat = [list(int(v) % q for v in r) for r in rows]
        n = len(mat[0])
        rref = _rref_mod(mat, q)
        return cls(q, n, len(rref), tuple(tuple(r) for r in rref))

    def coset_of(self, x: Point) -> Point:
        """Canonical coset representative: zero out the pivot coordinates."""
        v = [int(c) % self.q for c in x]
        for row, p in zip(self.basis, self.pivots):
            coef = v[p]
            if coef:
                for j in range(self.n):
                    v[j] = (v[j] - coef * row[j]) % self.q
        return tuple(v)

    def points(self) -> List[Point]:
        """All q^k points of the subspace."""
        out = []
        for coeffs in itertools.product(range(self.q), repeat=self.k):
            v = [0] * self.n
            for c, row in zip(coeffs, self.basis):
                for j in range(self.n):
                    v[j] = (v[j] + c * row[j]) % self.q
            out.append(tuple(v))
        return out


def _rref_mod(mat: List[List[int]], q: int) -> List[List[int]]:
    rows = [r[:] for r in mat]
    n = len(rows[0]) if rows else 0
    out: List[List[int]] = []
    pivot_col = 0
    while rows and pivot_col < n:
        pivot_row = next((r for r in rows if r[pivot_col] % q != 0), None)
        if pivot_row is None:
            pivot_col += 1
            continue
        rows.remove(pivot_row)
        inv = pow(pivot_row[pivot_col], q - 2, q)
        pivot_row = [(v * inv) % q for v in pivot_row]
        for r in rows + out:
            coef = r[pivot_col] % q
            if coef:
                for j in range(n):
                    r[j] = (r[j] - coef * pivot_row[j]) % q
        out.append(pivot_row)
        pivot_col += 1
    out.sort(key=lambda r: next((j for j, v in enumerate(r) if v), n))
    return out


@dataclass(frozen=True)
class FFSet:
    """A finite point set in F_q^n."""

    q: int
    n: int
    points: frozenset = field(repr=False)

    def __post_init__(self):
        _require_prime(self.q)
        pts = frozenset(tuple(int(v) % self.q for v in p) for p in self.points)
        if any(len(p) != self.n for p in pts):
            raise ValueError("point dimension mismatch")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def full_space(cls, q: int, n: int) -> "FFSet":
        return cls(q, n, frozenset(itertools.product(range(q), repeat=n)))

    def to_csv(self) -> str:
        lines = [",".join(f"x{j}" for j in range(self.n))]
        for p in sorted(self.points):
            lines.append(",".join(str(v) for v in p))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, q: int, text: str) -> "FFSet":
        rows = [r for r in text.strip().splitlines()][1:]
        pts = frozenset(tuple(int(v) for v in r.split(",")) for r in rows)
        n = len(next(iter(pts))) if pts else 0
        return cls(q, n, pts)


def ff_directions(q: int, n: int, k: int) -> List[FFSubspace]:
    """All k-subspaces of F_q^n in canonical RREF.

    Enumerates pivot-column patterns and free entries; the count equals the
    Gaussian binomial coefficient.
    """
    _require_prime(q)
    if not (1 <= k <= n - 1):
        raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    count = gaussian_binomial(n, k, q)
    if count > MAX_DIRECTIONS:
        raise ValueError(f"{count} subspaces exceeds cap {MAX_DIRECTIONS}")
    out = []
    for pivots in itertools.combinations(range(n), k):
        free_cols = [
            (i, j)
            for i in range(k)
            for j in range(n)
            if j > pivots[i] and j not in pivots
        ]
        for values in itertools.product(range(q), repeat=len(free_cols)):
            rows = [[0] * n for _ in range(k)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, j), v in zip(free_cols, values):
                rows[i][j] = v
            out.append(FFSubspace(q, n, k, tuple(tuple(r) for r in rows)))
    assert len(out) == count
    return out


def ff_coset_profile(f: FFSet, p: FFSubspace):
    """Distribution of the set over the q^(n-k) cosets of the subspace.

    Returns (best_offset, max_count, histogram) where histogram maps every
    coset representative to its point count (zeros included) and best_offset
    is the lexicographically smallest representative attaining the maximum.
    """
    if (f.q, f.n) != (p.q, p.n):
        raise ValueError("FFSet and FFSubspace live in different spaces")
    free = [j for j in range(p.n) if j not in p.pivots]
    histogram: Dict[Point, int] = {}
    for values in itertools.product(range(p.q), repeat=len(free)):
        rep = [0] * p.n
        for j, v in zip(free, values):
            rep[j] = v
        histogram[tuple(rep)] = 0
    for x in f.points:
        histogram[p.coset_of(x)] += 1
    best_offset = min(histogram, key=lambda r: (-histogram[r], r))
    return best_offset, histogram[best_offset], histogram


def ff_is_kakeya(k_set: FFSet) -> bool:
    """Does the set contain a full line in every direction?"""
    q = k_set.q
    for direction in ff_directions(q, k_set.n, 1):
        _, max_count, _ = ff_coset_profile(k_set, direction)
        if max_count < q:
            return False
    return True


def ff_is_spread_furstenberg(f: FFSet, k: int, m: int, big_m: int) -> bool:
    """At least big_m directions of k-subspaces have a coset holding >= m
    points of the set."""
    if m < 1 or big_m < 1:
        raise ValueError("m and M must be >= 1")
    hits = 0
    for direction in ff_directions(f.q, f.n, k):
        _, max_count, _ = ff_coset_profile(f, direction)
        if max_count >= m:
            hits += 1
            if hits >= big_m:
                return True
    return False


def ff_pigeonhole_verify(f: FFSet, k: int) -> bool:
    """Every direction has a coset with at least ceil(|F| / q^(n-k)) points.

    This is a theorem (averaging over the coset partition), so False
    indicates an implementation bug.
    """
    ncosets = f.q ** (f.n - k)
    need = -(-len(f) // ncosets)
    for direction in ff_directions(f.q, f.n, k):
        _, max_count, _ = ff_coset_profile(f, direction)
        if max_count < need:
            return False
    return True


@dataclass(frozen=True)
class SearchResult:
    size: int
    witness: FFSet
    nodes_explored: int

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "witness": sorted(self.witness.points),
            "nodes_explored": self.nodes_explored,
        }


def _min_set_meeting(q: int, n: int, k: int, m: int, node_cap: Optional[int]) -> SearchResult:
    """Smallest set with a coset of >= m points in every k-direction.

    Exhaustive lexicographic scan by increasing size for q^n <= 16, which
    returns the lexicographically smallest witness of minimal size.  Larger
    spaces use a depth-first completion search with direction-based pruning;
    it is deterministic but only guarantees a minimal-size witness.
    """
    directions = ff_directions(q, n, k)
    universe = sorted(itertools.product(range(q), repeat=n))
    nodes = 0

    def satisfied(points) -> bool:
        fset = FFSet(q, n, frozenset(points))
        return all(
            ff_coset_profile(fset, d)[1] >= m for d in directions
        )

    if q ** n <= EXHAUSTIVE_POINT_CAP:
        for size in range(m, q ** n + 1):
            for combo in itertools.combinations(universe, size):
                nodes += 1
                if node_cap is not None and nodes > node_cap:
                    raise SearchBudgetExceeded(f"node cap {node_cap} exceeded")
                if satisfied(combo):
                    return SearchResult(size, FFSet(q, n, frozenset(combo)), nodes)
        raise RuntimeError("search exhausted without a witness")

    # Branch and bound: grow the set by completing, for the first unmet
    # direction, each candidate coset up to m points (smallest additions
    # first), so the first solution found at the minimal size is the
    # lexicographically smallest one.
    best: List[Optional[SearchResult]] = [None]

    def coset_deficits(points):
        fset = FFSet(q, n, frozenset(points))
        worst = None
        for d in directions:
            _, max_count, hist = ff_coset_profile(fset, d)
            if max_count >= m:
                continue
            deficit = m - max_count
            if worst is None or deficit > worst[0]:
                worst = (deficit, d, hist)
        return worst

    def dfs(points: Tuple[Point, ...]):
        nonlocal nodes
        nodes += 1
        if node_cap is not None and nodes > node_cap:
            raise SearchBudgetExceeded(f"node cap {node_cap} exceeded")
        if best[0] is not None and len(points) >= best[0].size:
            return
        unmet = coset_deficits(points)
        if unmet is None:
            best[0] = SearchResult(len(points), FFSet(q, n, frozenset(points)), nodes)
            return
        deficit, d, hist = unmet
        if best[0] is not None and len(points) + deficit >= best[0].size:
            return
        pts = set(points)
        for rep in sorted(hist, key=lambda r: (-hist[r], r)):
            coset_pts = sorted(
                tuple((v + r) % q for v, r in zip(pt, rep)) for pt in d.points()
            )
            missing = [p for p in coset_pts if p not in pts]
            need = m - (len(coset_pts) - len(missing))
            if need > len(missing):
                continue
            for addition in itertools.combinations(missing, need):
                dfs(tuple(sorted(pts | set(addition))))

    dfs(())
    if best[0] is None:
        raise RuntimeError("search found no witness")
    return best[0]


def ff_min_kakeya(q: int, n: int, node_cap: Optional[int] = None) -> SearchResult:
    """Minimal cardinality of a Kakeya set in F_q^n, with witness."""
    _require_prime(q)
    return _min_set_meeting(q, n, 1, q, node_cap)


def ff_min_spread(q: int, n: int, k: int, m: int, node_cap: Optional[int] = None) -> SearchResult:
    """Minimal size of a set with a coset of >= m points in every
    k-direction (the full-direction-family case)."""
    _require_prime(q)
    if not (1 <= m <= q ** k):
        raise ValueError(f"need 1 <= m <= q^k = {q ** k}, got m={m}")
    return _min_set_meeting(q, n, k, m, node_cap)
