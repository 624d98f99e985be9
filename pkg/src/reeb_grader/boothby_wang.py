"""Gradings of Reeb orbits of a quasi-regular Boothby-Wang bundle.

An orbit of multiplicity ``m`` over a stratum S with uniformizing group of
order |Gamma| has Maslov index ``2 m <c_1, A_S> / |Gamma|``; after the
Morse-Bott perturbation each critical point of the stratum's perfect Morse
function of index ``d`` contributes a generator of degree

    mu(S, m) - dim(S)/2 + d             (unreduced)
    mu(S, m) - dim(S)/2 + d + n - 3     (reduced)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Iterator, Sequence

from .orbifold_base import OrbifoldBase, Stratum, sum_w_tilde, validate, BaseValidationError


class Convention(str, Enum):
    UNREDUCED = "unreduced"
    REDUCED = "reduced"


class IntegralityError(ArithmeticError):
    """A Maslov index came out non-integral: the base data are inconsistent."""


@dataclass(frozen=True)
class BundleSpec:
    base: OrbifoldBase
    convention: Convention = Convention.REDUCED

    def __post_init__(self) -> None:
        object.__setattr__(self, "convention", Convention(self.convention))
        failures = validate(self.base)
        if failures:
            raise BaseValidationError(failures)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def shift(self) -> int:
        return self.base.n - 3 if self.convention is Convention.REDUCED else 0


@dataclass(frozen=True)
class GeneratorKey:
    stratum: Stratum
    m: int
    d: int

    def triple(self) -> str:
        return f"{self.stratum.name}:{self.m}:{self.d}"


def orbit_maslov(stratum: Stratum, m: int) -> int:
    """Maslov index of the multiplicity-``m`` orbit over ``stratum``.

    Normal directions of an orbifold stratum rotate by a fraction of a turn;
    each contributes ``2 floor(x) + 1`` instead of ``2x``, which is the
    linear term corrected by ``1 - 2 frac(x)``.
    """
    if m < 1:
        raise ValueError("multiplicity must be at least 1")
    g = stratum.gamma_order
    value = Fraction(2 * m) * stratum.chern_pairing / g
    for a in stratum.normal_weights:
        value -= 2 * Fraction((stratum.bundle_degree * a * m) % g, g) - 1
    if value.denominator != 1:
        raise IntegralityError(
            f"integrality violation on stratum {stratum.name}: Maslov index of "
            f"multiplicity {m} is {value}, not an integer"
        )
    return int(value)


def _require_stratum(spec: BundleSpec, stratum: Stratum) -> None:
    if stratum not in spec.base.strata:
        raise ValueError(f"stratum {stratum.name} does not belong to this base")


def maslov_index(spec: BundleSpec, stratum: Stratum, m: int) -> int:
    _require_stratum(spec, stratum)
    return orbit_maslov(stratum, m)


def generator_degree(spec: BundleSpec, key: GeneratorKey) -> int:
    _require_stratum(spec, key.stratum)
    if key.stratum.betti_at(key.d) <= 0:
        raise ValueError(f"no homology of degree {key.d} on stratum {key.stratum.name}")
    mu = orbit_maslov(key.stratum, key.m)
    return mu - key.stratum.dim // 2 + key.d + spec.shift


def degree_lower_bound(spec: BundleSpec, stratum: Stratum, m: int) -> int:
    """A bound below every generator degree on ``stratum`` at multiplicity ``m`` or higher.

    Each normal correction term lies in ``(-1, 1]`` and the linear term grows with ``m`` when the pairing is positive.
    """
    linear = Fraction(2 * m) * stratum.chern_pairing / stratum.gamma_order
    slack = len(stratum.normal_weights)
    return math.floor(linear) - slack - stratum.dim // 2 + spec.shift


def generators(spec: BundleSpec, m: int) -> Iterator[GeneratorKey]:
    """Generator keys of multiplicity ``m`` on every stratum that carries such orbits."""
    for stratum in spec.base.strata:
        if not stratum.admits(m):
            continue
        for d in range(0, stratum.dim + 1, 2):
            if stratum.betti_at(d) > 0:
                yield GeneratorKey(stratum, m, d)


# -- first Chern class of the contact distribution -------------------------


@dataclass(frozen=True)
class LatticeClass:
    """An element of Z^k / <w> written as (torsion part, free coordinates).

    The quotient splits as Z/g (+) Z^{k-1} with ``g = gcd(w)``. Since c_1 is
    only defined up to the orientation convention, the class is reported up
    to sign: the first nonzero free coordinate is made positive, or, for a
    pure torsion class, the smaller of ``t`` and ``g - t`` is kept.
    """

    torsion_order: int
    torsion: int
    free: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return self.torsion == 0 and not any(self.free)

    @property
    def is_rationally_zero(self) -> bool:
        return not any(self.free)

    @property
    def divisibility(self) -> int:
        return reduce(math.gcd, self.free, 0)

    @property
    def invariant(self) -> tuple[int, int]:
        """Basis-independent summary: (divisibility of the free part,
        order of the torsion part modulo what automorphisms can absorb)."""
        h = math.gcd(self.divisibility, self.torsion_order)
        order = h // math.gcd(self.torsion, h) if h else 1
        return self.divisibility, order

    @property
    def value(self) -> int:
        """The single integer of a rank-one torsion-free quotient (e.g. k = 2, gcd(w) = 1)."""
        if self.torsion_order != 1 or len(self.free) != 1:
            raise ValueError("class is not a single integer in this quotient")
        return self.free[0]

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        if self.torsion_order > 1:
            parts.append(f"{self.torsion} mod {self.torsion_order}")
        if any(self.free):
            parts.append("(" + ", ".join(map(str, self.free)) + ")")
        return " + ".join(parts)


def unimodular_reducer(w: Sequence[int]) -> tuple[list[list[int]], int]:
    """Return ``(U, g)`` with ``U`` unimodular and ``U w = (g, 0, ..., 0)``, ``g = gcd(w) > 0``."""
    k = len(w)
    v = [int(x) for x in w]
    if not any(v):
        raise ValueError("curvature weights must not all vanish")
    U = [[int(i == j) for j in range(k)] for i in range(k)]
    while True:
        nonzero = [i for i in range(k) if v[i]]
        p = min(nonzero, key=lambda i: abs(v[i]))
        if p != 0:
            v[0], v[p] = v[p], v[0]
            U[0], U[p] = U[p], U[0]
        done = True
        for i in range(1, k):
            if v[i]:
                q = v[i] // v[0]
                v[i] -= q * v[0]
                U[i] = [a - q * b for a, b in zip(U[i], U[0])]
                done = done and v[i] == 0
        if done:
            break
    if v[0] < 0:
        v[0] = -v[0]
        U[0] = [-a for a in U[0]]
    return U, v[0]


def quotient_class(w: Sequence[int], x: Sequence[int]) -> LatticeClass:
    """The class of ``x`` in ``Z^k / <w>``."""
    if len(w) != len(x):
        raise ValueError("w and x must have the same length")
    U, g = unimodular_reducer(w)
    y = [sum(a * b for a, b in zip(row, x)) for row in U]
    torsion, free = y[0] % g, y[1:]
    first = next((c for c in free if c), 0)
    if first < 0 or (first == 0 and (-torsion) % g < torsion):
        torsion, free = (-torsion) % g, [-c for c in free]
    return LatticeClass(torsion_order=g, torsion=torsion, free=tuple(free))


def first_chern_xi(spec: BundleSpec) -> LatticeClass:
    """c_1 of the contact distribution: the class of ``w_tilde`` in Z^k / <w>."""
    w_tilde = spec.base.w_tilde
    if any(x.denominator != 1 for x in w_tilde):
        raise ValueError("non-integral anticanonical weights: c_1(xi) needs an integral presentation")
    return quotient_class(spec.base.w, [int(x) for x in w_tilde])


# -- well-definedness gate -------------------------------------------------


@dataclass(frozen=True)
class WellDefinedness:
    sufficient: bool
    bad_degrees: tuple[int, ...]
    sum_w_tilde: Fraction


def well_definedness(spec: BundleSpec, scan_limit: int = 200) -> WellDefinedness:
    """Check ``sum w_tilde > 1`` and scan for generators of degree -1, 0 or 1.

    Degrees grow with ``m`` when every Chern pairing is positive, so the scan
    of a stratum stops once its degree lower bound exceeds 1; otherwise it
    runs to ``scan_limit``.
    """
    total = sum_w_tilde(spec.base)
    bad = set()
    for stratum in spec.base.strata:
        growing = stratum.chern_pairing > 0
        for m in range(1, scan_limit + 1):
            if not stratum.admits(m):
                continue
            degrees = [
                generator_degree(spec, GeneratorKey(stratum, m, d))
                for d in range(0, stratum.dim + 1, 2)
                if stratum.betti_at(d) > 0
            ]
            bad.update(x for x in degrees if -1 <= x <= 1)
            if growing and degree_lower_bound(spec, stratum, m) > 1:
                break
    return WellDefinedness(sufficient=total > 1, bad_degrees=tuple(sorted(bad)), sum_w_tilde=total)
