"""Graded ranks of cylindrical contact homology and comparisons between structures.

The chain complex has one generator per (stratum, multiplicity, Morse degree)
with multiplicity ``betti[d]``. Under the parity and dimension arguments the
differential vanishes, so chain ranks are homology ranks.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional

from .boothby_wang import (
    BundleSpec,
    Convention,
    GeneratorKey,
    LatticeClass,
    degree_lower_bound,
    first_chern_xi,
    generator_degree,
    generators,
    well_definedness,
)
from .moduli import GateError
from .orbifold_base import OrbifoldBase, wang_ziller

log = logging.getLogger(__name__)

NOT_INVARIANT_WARNING = (
    "WARNING: well-definedness gate overridden; these ranks are not a contact invariant"
)


@dataclass(frozen=True)
class GradedRanks:
    ranks: Mapping[int, int]
    provenance: Mapping[int, tuple[GeneratorKey, ...]]
    max_degree: int
    convention: Convention
    smallest_omitted: Optional[int] = None
    gate_overridden: bool = field(default=False, compare=False)

    def rank(self, degree: int) -> int:
        return self.ranks.get(degree, 0)

    def degrees(self) -> list[int]:
        return sorted(self.ranks)

    def __post_init__(self) -> None:
        for degree, rank in self.ranks.items():
            if rank != len(self.provenance.get(degree, ())):
                raise ValueError(f"rank at degree {degree} disagrees with its provenance")


def compute(spec: BundleSpec, max_degree: int, override_gate: bool = False) -> GradedRanks:
    """All generators of degree at most ``max_degree`` (inclusive)."""
    if max_degree < 2:
        raise ValueError("max_degree must be >= 2")
    for stratum in spec.base.strata:
        if stratum.chern_pairing <= 0:
            raise ValueError(
                f"non-terminating enumeration: stratum {stratum.name} has chern_pairing "
                f"{stratum.chern_pairing} <= 0, so degrees do not grow with multiplicity"
            )
    if not well_definedness(spec).sufficient:
        if not override_gate:
            raise GateError("well-definedness gate failed: sum of w_tilde must exceed 1")
        log.warning(NOT_INVARIANT_WARNING)

    order = {s: i for i, s in enumerate(spec.base.strata)}
    found: dict[int, list[GeneratorKey]] = defaultdict(list)
    omitted: Optional[int] = None
    m = 0
    while True:
        m += 1
        keys = list(generators(spec, m))
        degrees = [generator_degree(spec, key) for key in keys]
        for key, degree in zip(keys, degrees):
            if degree <= max_degree:
                found[degree].extend([key] * key.stratum.betti_at(key.d))
            elif omitted is None or degree < omitted:
                omitted = degree
        # Stop once nothing later can land in range or undercut the smallest omitted degree.
        floor = min(degree_lower_bound(spec, s, m + 1) for s in spec.base.strata)
        if floor > max_degree and omitted is not None and floor >= omitted:
            break

    provenance = {
        degree: tuple(sorted(keys, key=lambda k: (order[k.stratum], k.m, k.d)))
        for degree, keys in found.items()
    }
    return GradedRanks(
        ranks={d: len(v) for d, v in sorted(provenance.items())},
        provenance=dict(sorted(provenance.items())),
        max_degree=max_degree,
        convention=spec.convention,
        smallest_omitted=omitted,
        gate_overridden=override_gate and not well_definedness(spec).sufficient,
    )


@dataclass(frozen=True)
class ComparisonVerdict:
    equal_up_to_cutoff: bool
    first_difference: Optional[tuple[int, int, int]] = None
    max_degree: int = 0


def compare_ranks(a: GradedRanks, b: GradedRanks) -> ComparisonVerdict:
    if a.convention != b.convention:
        raise ValueError("cannot compare gradings under different conventions")
    cutoff = min(a.max_degree, b.max_degree)
    for degree in sorted(set(a.ranks) | set(b.ranks)):
        if degree > cutoff:
            break
        if a.rank(degree) != b.rank(degree):
            return ComparisonVerdict(False, (degree, a.rank(degree), b.rank(degree)), cutoff)
    return ComparisonVerdict(True, None, cutoff)


def compare(spec_a: BundleSpec, spec_b: BundleSpec, max_degree: int) -> ComparisonVerdict:
    """Degree-by-degree comparison of graded ranks up to ``max_degree``."""
    if spec_a.convention != spec_b.convention:
        raise ValueError("cannot compare gradings under different conventions")
    return compare_ranks(compute(spec_a, max_degree), compute(spec_b, max_degree))


@dataclass(frozen=True)
class FamilyMember:
    k: int
    l: int
    chern_xi: LatticeClass
    min_degree: Optional[int]


@dataclass(frozen=True)
class FamilyTable:
    c: int
    max_degree: int
    members: tuple[FamilyMember, ...]
    verdicts: Mapping[tuple[tuple[int, int], tuple[int, int]], ComparisonVerdict]

    @property
    def all_distinguished(self) -> bool:
        return all(not v.equal_up_to_cutoff for v in self.verdicts.values())

    @property
    def common_chern_xi(self) -> Optional[LatticeClass]:
        classes = {m.chern_xi for m in self.members}
        return classes.pop() if len(classes) == 1 else None


def family_pairs(c: int, bound: int) -> list[tuple[int, int]]:
    """Coprime (k, l) with k - l = c, k, l >= 1 and k <= bound."""
    return [(k, k - c) for k in range(1, bound + 1) if k - c >= 1 and math.gcd(k, k - c) == 1]


def enumerate_family(
    c: int,
    bound: int,
    max_degree: int,
    convention: Convention = Convention.REDUCED,
) -> FamilyTable:
    """Pairwise verdicts for the Wang-Ziller structures xi_{k,l} with k - l = c."""
    if bound < c + 1:
        raise ValueError(f"bound must be at least c + 1 = {c + 1}")
    members, ranks = [], {}
    for k, l in family_pairs(c, bound):
        spec = BundleSpec(wang_ziller(k, l), convention)
        g = compute(spec, max_degree)
        ranks[(k, l)] = g
        members.append(FamilyMember(k, l, first_chern_xi(spec), min(g.ranks, default=None)))
    verdicts = {
        (p, q): compare_ranks(ranks[p], ranks[q]) for p, q in combinations(sorted(ranks), 2)
    }
    table = FamilyTable(c, max_degree, tuple(members), verdicts)
    for (p, q), v in verdicts.items():
        if sum(p) != sum(q) and v.equal_up_to_cutoff:
            raise AssertionError(f"structures {p} and {q} have different k+l but equal ranks")
    return table


def poincare_series(g: GradedRanks) -> str:
    """``r0·q^d0 + r1·q^d1 + ...`` in increasing degree; ``0`` when empty."""
    terms = []
    for degree in sorted(g.ranks):
        rank = g.ranks[degree]
        terms.append(f"q^{degree}" if rank == 1 else f"{rank}·q^{degree}")
    return " + ".join(terms) if terms else "0"


# -- line-oriented records ---------------------------------------------------

RECORDS_HEADER = "# degree,rank,stratum:m:d;..."


def to_records(g: GradedRanks) -> str:
    omitted = "none" if g.smallest_omitted is None else str(g.smallest_omitted)
    lines = [
        RECORDS_HEADER,
        f"# convention={g.convention.value} max_degree={g.max_degree} smallest_omitted={omitted}",
    ]
    for degree in sorted(g.ranks):
        triples = ";".join(key.triple() for key in g.provenance[degree])
        lines.append(f"{degree},{g.ranks[degree]},{triples}")
    return "\n".join(lines) + "\n"


def parse_records(text: str, base: OrbifoldBase) -> GradedRanks:
    """Inverse of ``to_records``; stratum names are resolved against ``base``."""
    meta: dict[str, str] = {}
    ranks: dict[int, int] = {}
    provenance: dict[int, tuple[GeneratorKey, ...]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, value = token.split("=", 1)
                    meta[key] = value
            continue
        try:
            degree_s, rank_s, triples = line.split(",", 2)
            keys = []
            for triple in triples.split(";"):
                name, m, d = triple.split(":")
                keys.append(GeneratorKey(base.stratum(name), int(m), int(d)))
            degree, rank = int(degree_s), int(rank_s)
        except (ValueError, KeyError) as exc:
            raise ValueError(f"line {lineno}: malformed record {line!r} ({exc})") from exc
        ranks[degree] = rank
        provenance[degree] = tuple(keys)
    try:
        convention = Convention(meta["convention"])
        max_degree = int(meta["max_degree"])
    except KeyError as exc:
        raise ValueError(f"records header is missing {exc}") from exc
    omitted = meta.get("smallest_omitted", "none")
    return GradedRanks(
        ranks=ranks,
        provenance=provenance,
        max_degree=max_degree,
        convention=convention,
        smallest_omitted=None if omitted == "none" else int(omitted),
    )
