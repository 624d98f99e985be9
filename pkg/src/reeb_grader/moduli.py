"""Virtual dimensions of punctured-sphere moduli problems and the cylinder certificate."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .boothby_wang import BundleSpec, orbit_maslov, well_definedness
from .orbifold_base import Stratum

THRESHOLD_NOTE = (
    "regularity thresholds differ between the manifold criterion (-2 + s - t) "
    "and its orbifold variant (-2 - s - t); both are applied verbatim in their own mode"
)


class GateError(RuntimeError):
    """The well-definedness gate failed (sum of anticanonical weights <= 1)."""


def worker_count() -> int:
    """Thread cap from REEB_GRADER_THREADS (default 1)."""
    raw = os.environ.get("REEB_GRADER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ModuliProblem:
    """Genus-0 curves with one positive puncture asymptotic to ``positive``
    and negative punctures asymptotic to ``negative``; each end is a
    (stratum, multiplicity) pair."""

    n: int
    positive: tuple[tuple[Stratum, int], ...]
    negative: tuple[tuple[Stratum, int], ...] = ()
    rel_chern: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", tuple(tuple(p) for p in self.positive))
        object.__setattr__(self, "negative", tuple(tuple(p) for p in self.negative))
        if len(self.positive) != 1:
            raise ValueError("exactly one positive puncture is supported")

    @classmethod
    def cylinder(
        cls, n: int, top: tuple[Stratum, int], bottom: tuple[Stratum, int], rel_chern: int = 0
    ) -> "ModuliProblem":
        return cls(n, (top,), (bottom,), rel_chern)


def virtual_dimension(p: ModuliProblem) -> int:
    """(n-3)(1-s) + [mu+ + dim+/2] - sum over negatives of [mu_i - dim_i/2] + rel_chern.

    With one regular negative end this is ``mu+ - mu- + 2n - 2 + rel_chern``.
    """
    s = len(p.negative)
    (top, m_top), = p.positive
    value = (p.n - 3) * (1 - s) + orbit_maslov(top, m_top) + top.dim // 2
    for stratum, m in p.negative:
        value -= orbit_maslov(stratum, m) - stratum.dim // 2
    return value + p.rel_chern


def quotient_dimension(p: ModuliProblem) -> int:
    """Dimension after dividing out the R-translation of the symplectization."""
    return virtual_dimension(p) - 1


@dataclass(frozen=True)
class BranchTerm:
    multiplicity: int
    divisor_chern: Fraction

    def __post_init__(self) -> None:
        if self.multiplicity < 2:
            raise ValueError("branch multiplicity must be at least 2")
        object.__setattr__(self, "divisor_chern", Fraction(self.divisor_chern))


@dataclass(frozen=True)
class RegularityInput:
    line_chern: tuple[int, ...]
    s: int
    t: int
    branch_terms: tuple[BranchTerm, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "line_chern", tuple(self.line_chern))
        object.__setattr__(
            self,
            "branch_terms",
            tuple(b if isinstance(b, BranchTerm) else BranchTerm(*b) for b in self.branch_terms),
        )
        if self.s < 0 or self.t < 0 or self.s + self.t < 1:
            raise ValueError("need s, t >= 0 with at least one puncture")


def regularity_threshold(r: RegularityInput, orbifold: bool = False) -> Fraction:
    if not orbifold:
        return Fraction(-2 + r.s - r.t)
    branch = sum(
        ((1 - Fraction(1, b.multiplicity)) * b.divisor_chern for b in r.branch_terms), Fraction(0)
    )
    return branch - 2 - r.s - r.t


def regularity_check(r: RegularityInput, orbifold: bool = False) -> bool:
    """Every splitting summand's Chern number meets the threshold of the chosen mode."""
    bound = regularity_threshold(r, orbifold)
    return all(c >= bound for c in r.line_chern)


@dataclass(frozen=True)
class CylinderCertificate:
    holds: bool
    witnesses: tuple[ModuliProblem, ...]
    checked: int
    m_max: int
    notes: tuple[str, ...] = field(default=(THRESHOLD_NOTE,))


def _orbit_keys(spec: BundleSpec, m_max: int) -> list[tuple[Stratum, int]]:
    return [(s, m) for s in spec.base.strata for m in range(1, m_max + 1) if s.admits(m)]


def no_rigid_cylinders(
    spec: BundleSpec, m_max: int = 25, workers: int | None = None
) -> CylinderCertificate:
    """Scan all cylinders between orbits of multiplicity at most ``m_max``.

    A cylinder needs its positive end to have the larger period (action). The
    certificate holds when none of these problems has a zero-dimensional
    quotient moduli space; trivial cylinders (equal ends) are excluded.
    """
    if not well_definedness(spec).sufficient:
        raise GateError("well-definedness gate failed: sum of w_tilde must exceed 1")
    keys = _orbit_keys(spec, m_max)
    n = spec.n

    def scan(top: tuple[Stratum, int]) -> tuple[int, list[ModuliProblem]]:
        hits, count = [], 0
        for bottom in keys:
            if top[0].period(top[1]) <= bottom[0].period(bottom[1]):
                continue
            problem = ModuliProblem.cylinder(n, top, bottom)
            count += 1
            if quotient_dimension(problem) == 0:
                hits.append(problem)
        return count, hits

    workers = workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan, keys))
    else:
        results = [scan(k) for k in keys]
    witnesses = tuple(p for _, hits in results for p in hits)
    checked = sum(c for c, _ in results)
    return CylinderCertificate(
        holds=not witnesses, witnesses=witnesses, checked=checked, m_max=m_max
    )
