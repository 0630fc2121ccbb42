"""Randomized property suites for the subspace-metric inequalities.

Each check runs a seeded Monte Carlo loop and reports the violation count
together with the measured extremal constant, so the CLI can print both a
verdict and how much slack the inequality had.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grassmann import (
    AffineFlat,
    Subspace,
    affine_distance,
    ball_measure_estimate,
    grass_distance,
    haar_sample,
    min_rotation,
    sample_subflat,
)
from .tolerances import TOL_INEQ


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    violations: int
    measured_constant: float
    allowed_constant: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "violations": self.violations,
            "measured_constant": self.measured_constant,
            "allowed_constant": self.allowed_constant,
            "passed": self.passed,
        }


def check_translation_inequality(n: int, k: int, samples: int, seed=None) -> CheckResult:
    """d_A(U+a, V+a) <= (|a|+1) d_G(U,V) for a in U-perp, |a| <= 10.

    The translate of V is formed by re-orthogonalizing the offset
    (V + a = V + (a - proj_V a)).
    """
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(samples):
        u = haar_sample(n, k, rng)
        v = haar_sample(n, k, rng)
        g = rng.standard_normal(n)
        g -= u.project(g)
        norm = np.linalg.norm(g)
        if norm < 1e-12:
            continue
        a = g / norm * rng.uniform(0.0, 10.0)
        lhs = affine_distance(AffineFlat(u, a), AffineFlat.through(v, a))
        rhs = (np.linalg.norm(a) + 1.0) * grass_distance(u, v)
        if lhs > rhs + TOL_INEQ:
            violations += 1
        if rhs > 1e-12:
            worst = max(worst, lhs / rhs)
    return CheckResult("translation_inequality", samples, violations, worst, 1.0)


def check_rotation_pointwise(n: int, k: int, samples: int, seed=None) -> CheckResult:
    """|(I - R_{U,V}) b| <= 2 |b| d_G(U,V) for b in U."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(samples):
        u = haar_sample(n, k, rng)
        v = haar_sample(n, k, rng)
        b = u.basis @ rng.standard_normal(k) * rng.uniform(0.1, 10.0)
        r = min_rotation(u, v)
        lhs = float(np.linalg.norm(b - r.apply(b)))
        scale = float(np.linalg.norm(b)) * grass_distance(u, v)
        if lhs > 2.0 * scale + TOL_INEQ:
            violations += 1
        if scale > 1e-12:
            worst = max(worst, lhs / scale)
    return CheckResult("rotation_pointwise", samples, violations, worst, 2.0)


def check_min_rotation_norm(n: int, k: int, samples: int, seed=None) -> CheckResult:
    """||I - R_{U,V}|| <= sqrt(2) d_G(U,V)."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    sqrt2 = float(np.sqrt(2.0))
    for _ in range(samples):
        u = haar_sample(n, k, rng)
        v = haar_sample(n, k, rng)
        r = min_rotation(u, v)
        lhs = float(np.linalg.svd(np.eye(n) - r.matrix, compute_uv=False)[0])
        d = grass_distance(u, v)
        if lhs > sqrt2 * d + TOL_INEQ:
            violations += 1
        if d > 1e-12:
            worst = max(worst, lhs / d)
    return CheckResult("min_rotation_norm", samples, violations, worst, sqrt2)


def check_subflat_transport(
    n: int, k: int, k2: int, samples: int, seed=None, allowed: float = 10.0
) -> CheckResult:
    """d_A(R X + a, X + a) <= C (r + |a| + 1) d_G(U,V) for subflats X of U
    meeting B(0, r); reports the measured C."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(samples):
        u = haar_sample(n, k, rng)
        v = haar_sample(n, k, rng)
        r_ball = rng.uniform(0.2, 3.0)
        x = sample_subflat(AffineFlat(u, np.zeros(n)), k2, r_ball, rng)
        g = rng.standard_normal(n)
        g -= u.project(g)
        norm = np.linalg.norm(g)
        if norm < 1e-12:
            continue
        a = g / norm * rng.uniform(0.0, 5.0)
        rot = min_rotation(u, v)
        rotated = AffineFlat.through(
            Subspace(n, k2, rot.matrix @ x.direction.basis),
            rot.apply(x.offset) + a,
        )
        shifted = AffineFlat.through(x.direction, x.offset + a)
        lhs = affine_distance(rotated, shifted)
        scale = (r_ball + float(np.linalg.norm(a)) + 1.0) * grass_distance(u, v)
        if lhs > allowed * scale + TOL_INEQ:
            violations += 1
        if scale > 1e-12:
            worst = max(worst, lhs / scale)
    return CheckResult("subflat_transport", samples, violations, worst, allowed)


def check_ball_scaling(
    n: int,
    k: int,
    delta: float,
    samples: int,
    seed=None,
    rel_window: float = 0.3,
) -> CheckResult:
    """The Haar measure of B(U, delta) scales like delta^(k(n-k)):
    estimate(delta) / estimate(delta/2) should be within the relative
    window of 2^(k(n-k))."""
    u = haar_sample(n, k, seed=12345)
    big = ball_measure_estimate(u, delta, samples, seed)
    small = ball_measure_estimate(u, delta / 2, samples, seed)
    ratio = big / small if small > 0 else float("inf")
    expected = 2.0 ** (k * (n - k))
    ok = expected * (1 - rel_window) <= ratio <= expected * (1 + rel_window)
    return CheckResult("ball_scaling", samples, 0 if ok else 1, ratio, expected)
