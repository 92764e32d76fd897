"""Containment and monotonicity checks run by ``intervalexpm verify``.

Each check returns a :class:`PropertyReport`; a single violation means an
enclosure failed to contain something it provably must, i.e. a soundness
bug.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from intervalexpm.expm import Method, choose_params, enclose, point_exp_enclosures
from intervalexpm.matrix import IntervalMatrix
from intervalexpm.oracle import (
    BilinearInstance,
    bilinear_exact_corner,
    bilinear_matrix,
    endpoint_hull_lower_bound,
    example1_hull,
    example1_matrix,
    member_samples,
    point_exponentials_inside,
    sampled_hull_lower_bound,
)

METHODS = (Method.TAYLOR, Method.HORNER, Method.SCALING_SQUARING)

Transform = Callable[[IntervalMatrix], IntervalMatrix]


def _identity(M: IntervalMatrix) -> IntervalMatrix:
    return M


def collapse_to_midpoint(M: IntervalMatrix) -> IntervalMatrix:
    """Fault injection: replace an enclosure by its (unsound) midpoint."""
    return IntervalMatrix.point(M.midpoint())


@dataclass
class PropertyReport:
    name: str
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} {self.name}: {self.checked} checks, {len(self.violations)} violations"
        if self.violations:
            msg += f" (first: {self.violations[0]})"
        return msg


def random_interval_matrix(rng: np.random.Generator, n: int, max_norm: float = 4.0,
                           max_width: float = 0.5) -> IntervalMatrix:
    """Random ``n x n`` interval matrix with norm at most ``max_norm``."""
    lo = rng.uniform(-1.0, 1.0, (n, n))
    w = rng.uniform(0.0, max_width, (n, n))
    hi = lo + w
    scale = max_norm / max(np.max(np.sum(np.maximum(np.abs(lo), np.abs(hi)), axis=1)), 1e-300)
    scale = min(scale, 1.0) * rng.uniform(0.25, 1.0)
    return IntervalMatrix(lo * scale, hi * scale)


def nested_pair(rng: np.random.Generator, n: int) -> tuple[IntervalMatrix, IntervalMatrix]:
    """``(inner, outer)`` with ``inner`` a random sub-box of ``outer``."""
    outer = random_interval_matrix(rng, n)
    a = rng.uniform(0, 1, outer.shape)
    b = rng.uniform(0, 1, outer.shape)
    t0, t1 = np.minimum(a, b), np.maximum(a, b)
    w = outer.upper - outer.lower
    lo = np.clip(outer.lower + t0 * w, outer.lower, outer.upper)
    hi = np.clip(outer.lower + t1 * w, lo, outer.upper)
    return IntervalMatrix(lo, hi), outer


def check_example1(transform: Transform = _identity) -> PropertyReport:
    rep = PropertyReport("example1 optimal hull contained in every method")
    A = example1_matrix()
    ref = example1_hull(-3.0, -2.0)
    for method in METHODS:
        rep.checked += 1
        E = transform(enclose(A, method).enclosure)
        if not ref.subset(E):
            rep.violations.append(f"{method.value} misses the optimal hull")
    return rep


def check_sampled(corpus: list[IntervalMatrix], samples: int, seed: int,
                  transform: Transform = _identity) -> PropertyReport:
    rep = PropertyReport("sampled point exponentials contained in every method")
    for idx, A in enumerate(corpus):
        members = member_samples(A, samples, seed + idx)
        lo, hi = point_exp_enclosures(members)
        for method in METHODS:
            E = transform(enclose(A, method).enclosure)
            inside = point_exponentials_inside(E, members, lo, hi)
            rep.checked += inside.size
            rep.violations.extend(f"matrix {idx}, member {s}: {method.value}"
                                  for s in np.flatnonzero(~inside))
    return rep


def check_lower_bound_order(corpus: list[IntervalMatrix], samples: int, seed: int
                            ) -> PropertyReport:
    rep = PropertyReport("endpoint hull inside sampled hull")
    for idx, A in enumerate(corpus):
        rep.checked += 1
        ends = endpoint_hull_lower_bound(A)
        inner = sampled_hull_lower_bound(A, max(samples, 2), seed + idx)
        if not ends.subset(inner):
            rep.violations.append(f"matrix {idx}")
    return rep


def check_bilinear(count: int, seed: int, sizes=(1, 2, 3),
                   transform: Transform = _identity) -> PropertyReport:
    rep = PropertyReport("bilinear corner range contained in every method")
    rng = np.random.default_rng(seed)
    for idx in range(count):
        inst = BilinearInstance.random(int(sizes[idx % len(sizes)]), rng)
        exact = bilinear_exact_corner(inst)
        A = bilinear_matrix(inst)
        i, j = inst.corner
        for method in METHODS:
            rep.checked += 1
            E = transform(enclose(A, method).enclosure)
            if not exact.subset(E[i, j]):
                rep.violations.append(f"instance {idx} (n={inst.n}): {method.value}")
    return rep


def check_monotonicity(count: int, seed: int, transform: Transform = _identity
                       ) -> PropertyReport:
    rep = PropertyReport("inclusion monotonicity of every method")
    rng = np.random.default_rng(seed)
    for idx in range(count):
        inner, outer = nested_pair(rng, int(rng.integers(1, 6)))
        for method in METHODS:
            p = choose_params(outer, method)
            L = p.L if method is Method.SCALING_SQUARING else None
            rep.checked += 1
            a = transform(enclose(inner, method, p.K, L).enclosure)
            b = enclose(outer, method, p.K, L).enclosure
            if not a.subset(b):
                rep.violations.append(f"pair {idx}: {method.value}")
    return rep


def default_corpus(seed: int, count: int = 6) -> list[IntervalMatrix]:
    rng = np.random.default_rng(seed)
    return [example1_matrix()] + [random_interval_matrix(rng, int(rng.integers(1, 6)))
                                  for _ in range(count - 1)]


def run_all(samples: int = 100, seed: int = 0, matrix: IntervalMatrix | None = None,
            inject_fault: bool = False) -> list[PropertyReport]:
    transform = collapse_to_midpoint if inject_fault else _identity
    corpus = default_corpus(seed) if matrix is None else [matrix]
    reports = [
        check_example1(transform),
        check_sampled(corpus, samples, seed, transform),
        check_lower_bound_order(corpus, samples, seed),
    ]
    if matrix is None:
        reports.append(check_bilinear(50, seed, transform=transform))
        reports.append(check_monotonicity(20, seed, transform=transform))
    return reports
