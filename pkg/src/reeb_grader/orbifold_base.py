"""Symplectic (orbifold) bases of quasi-regular Boothby-Wang fibrations.

A base is recorded only through the data the grading consumes: its strata
(orbit spaces of the Reeb flow) with their even-degree Betti numbers, the
order of the local uniformizing group, and one Chern pairing per stratum,
plus the curvature weights ``w`` and anticanonical weights ``w_tilde`` with
respect to a chosen set of degree-two generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

Rational = Union[int, Fraction, str]


class BaseValidationError(ValueError):
    """Raised with every named failure found while validating a base."""

    def __init__(self, failures: Sequence[str]):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


def _rational(value: Rational) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use int, Fraction or 'p/q'")
    return Fraction(value)


@dataclass(frozen=True)
class Stratum:
    """One orbit space S_T of the Reeb flow.

    ``betti[j]`` is the rank of H_{2j}; odd Betti numbers vanish for the
    bases handled here. ``chern_pairing`` is the pairing of the base's first
    Chern class with the diagonal sphere class of the stratum.

    ``normal_weights`` lists the rotation weights of the normal directions
    of a weighted-projective stratum (empty for manifold strata and for
    custom data). An orbit of multiplicity ``m`` has period ``m / gamma_order``
    in units of the generic period; it lives on this stratum only if no normal
    direction closes up at that period, and the normal directions shift its
    Maslov index by the fractional rotation term (see
    ``boothby_wang.maslov_index``). ``bundle_degree`` scales every rotation
    angle, the normal ones included, the same way it scales ``chern_pairing``.
    """

    name: str
    dim: int
    gamma_order: int
    betti: tuple[int, ...]
    chern_pairing: Fraction
    normal_weights: tuple[int, ...] = ()
    bundle_degree: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "betti", tuple(int(b) for b in self.betti))
        object.__setattr__(self, "chern_pairing", _rational(self.chern_pairing))
        object.__setattr__(self, "normal_weights", tuple(int(a) for a in self.normal_weights))

    @property
    def total_betti(self) -> int:
        return sum(self.betti)

    def betti_at(self, d: int) -> int:
        """Rank of H_d (real degree ``d``); zero outside range and in odd degrees."""
        if d < 0 or d > self.dim or d % 2:
            return 0
        return self.betti[d // 2]

    def period(self, m: int) -> Fraction:
        return Fraction(m, self.gamma_order)

    def admits(self, m: int) -> bool:
        """Whether an orbit of multiplicity ``m`` lies on this stratum."""
        if m < 1:
            return False
        k = self.bundle_degree
        return all((k * a * m) % self.gamma_order for a in self.normal_weights)

    def problems(self) -> list[str]:
        out = []
        if not _valid_name(self.name):
            out.append(f"stratum name {self.name!r} must be non-empty without ',', ';', ':' or spaces")
        if self.dim < 0 or self.dim % 2:
            out.append(f"stratum {self.name}: dim parity: dimension {self.dim} must be even and nonnegative")
        elif len(self.betti) != self.dim // 2 + 1:
            out.append(
                f"stratum {self.name}: betti length mismatch: expected {self.dim // 2 + 1} "
                f"even-degree entries, got {len(self.betti)}"
            )
        if any(b < 0 for b in self.betti):
            out.append(f"stratum {self.name}: negative Betti number")
        if self.betti and self.betti[0] < 1:
            out.append(f"stratum {self.name}: betti[0] must be at least 1 (connected stratum)")
        if self.gamma_order < 1:
            out.append(f"stratum {self.name}: gamma_order must be a positive integer")
        if self.bundle_degree < 1:
            out.append(f"stratum {self.name}: bundle_degree must be positive")
        return out


def _valid_name(name: str) -> bool:
    return bool(name) and not any(c in name for c in ",;: \t\n")


@dataclass(frozen=True)
class OrbifoldBase:
    """The base Z of real dimension 2n - 2; the first stratum is the generic one."""

    n: int
    strata: tuple[Stratum, ...]
    w: tuple[int, ...]
    w_tilde: tuple[Fraction, ...]
    label: str = field(default="custom", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "strata", tuple(self.strata))
        object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        object.__setattr__(self, "w_tilde", tuple(_rational(x) for x in self.w_tilde))

    @property
    def k(self) -> int:
        return len(self.w)

    @property
    def top(self) -> Stratum:
        return self.strata[0]

    @property
    def total_betti(self) -> int:
        return self.top.total_betti

    def stratum(self, name: str) -> Stratum:
        for s in self.strata:
            if s.name == name:
                return s
        raise KeyError(f"no stratum named {name!r}")

    def index_of(self, stratum: Stratum) -> int:
        return self.strata.index(stratum)


def validate(base: OrbifoldBase) -> list[str]:
    """Return the named invariant violations of ``base`` (empty when valid)."""
    failures = []
    if base.n < 2:
        failures.append(f"n must be at least 2, got {base.n}")
    if not base.strata:
        failures.append("at least one stratum is required")
    for s in base.strata:
        failures += s.problems()
        if s.dim > 2 * base.n - 2:
            failures.append(f"stratum {s.name}: dim {s.dim} exceeds base dimension {2 * base.n - 2}")
    if base.strata:
        top = base.top
        if top.dim != 2 * base.n - 2:
            failures.append(f"top stratum must have dim 2n-2 = {2 * base.n - 2}, got {top.dim}")
        if top.gamma_order != 1:
            failures.append(f"top stratum gamma_order must be 1, got {top.gamma_order}")
        names = [s.name for s in base.strata]
        if len(set(names)) != len(names):
            failures.append("stratum names must be unique")
    if len(base.w) != len(base.w_tilde):
        failures.append(f"w has {len(base.w)} entries but w_tilde has {len(base.w_tilde)}")
    if not base.w:
        failures.append("at least one Chern generator is required")
    if any(x <= 0 for x in base.w):
        failures.append("curvature weights w must be positive integers")
    return failures


def _checked(base: OrbifoldBase) -> OrbifoldBase:
    failures = validate(base)
    if failures:
        raise BaseValidationError(failures)
    return base


def _projective_betti(dims: Iterable[int]) -> tuple[int, ...]:
    # Poincare polynomial of a product of projective spaces, in powers of t^2.
    coeffs = [1]
    for d in dims:
        out = [0] * (len(coeffs) + d)
        for i, c in enumerate(coeffs):
            for j in range(d + 1):
                out[i + j] += c
        coeffs = out
    return tuple(coeffs)


def product_projective(factors: Sequence[tuple[int, int]]) -> OrbifoldBase:
    """Product of projective spaces CP^{d_i}, curvature weight ``w_i`` on factor i.

    The anticanonical class is ``sum (d_i + 1) h_i`` in the unit hyperplane
    generators, and the diagonal sphere pairs the scaled classes ``w_i h_i``,
    so ``chern_pairing = sum (d_i + 1) w_i``. For CP^1 x CP^1 with weights
    ``(k, l)`` this is ``2k + 2l``.
    """
    factors = [tuple(f) for f in factors]
    failures = []
    if not factors:
        failures.append("at least one factor is required")
    for i, f in enumerate(factors):
        if len(f) != 2:
            failures.append(f"factor {i} must be a (complex_dim, weight) pair")
            continue
        d, w = f
        if int(d) != d or d < 1:
            failures.append(f"factor {i}: complex dimension must be a positive integer")
        if int(w) != w or w < 1:
            failures.append(f"factor {i}: weight must be a positive integer")
    if failures:
        raise BaseValidationError(failures)
    dims = [int(d) for d, _ in factors]
    weights = [int(w) for _, w in factors]
    top = Stratum(
        name="top",
        dim=2 * sum(dims),
        gamma_order=1,
        betti=_projective_betti(dims),
        chern_pairing=Fraction(sum((d + 1) * w for d, w in zip(dims, weights))),
    )
    label = " x ".join(f"CP^{d}[{w}]" for d, w in zip(dims, weights))
    return _checked(
        OrbifoldBase(
            n=sum(dims) + 1,
            strata=(top,),
            w=tuple(weights),
            w_tilde=tuple(Fraction(d + 1) for d in dims),
            label=label,
        )
    )


def wang_ziller(k: int, l: int) -> OrbifoldBase:
    """CP^1 x CP^1 with curvature ``k c_1 + l c_2``."""
    return product_projective([(1, k), (1, l)])


def weighted_projective(a: Sequence[int], k: int = 1) -> OrbifoldBase:
    """Weighted projective space P(a_0, ..., a_{n-1}) with bundle degree ``k``.

    Strata are the closed index sets ``I = {i : q | a_i}`` for ``q > 1``;
    sets arising from different ``q`` coincide and are merged, and the
    uniformizing group has order ``gcd(a_i : i in I)``. Every stratum is a
    weighted projective space of complex dimension ``|I| - 1`` and carries
    Betti numbers ``(1, ..., 1)``.
    """
    a = [int(x) for x in a]
    failures = []
    if len(a) < 2:
        failures.append("need at least two weights (the base must have positive dimension)")
    if any(x < 1 for x in a):
        failures.append("weights must be positive integers")
    if k < 1:
        failures.append("bundle degree k must be positive")
    if not failures and reduce(math.gcd, a) > 1:
        failures.append(
            f"weights share a common factor {reduce(math.gcd, a)}: the action is not "
            "effective; divide it out first"
        )
    if not failures:
        shared = [x for x in a if math.gcd(k, x) > 1]
        if shared:
            failures.append(
                f"bundle degree {k} shares a factor with weight {shared[0]}: the "
                "cyclic quotient of the sphere is not free"
            )
    if failures:
        raise BaseValidationError(failures)

    n = len(a)
    pairing = Fraction(k * sum(a))
    strata = [Stratum("top", 2 * (n - 1), 1, (1,) * n, pairing, (), k)]
    seen: set[tuple[int, ...]] = set()
    closed = []
    for q in range(2, max(a) + 1):
        subset = tuple(i for i, x in enumerate(a) if x % q == 0)
        if subset and subset not in seen:
            seen.add(subset)
            closed.append(subset)
    closed.sort(key=lambda s: (-len(s), s))
    for subset in closed:
        g = reduce(math.gcd, (a[i] for i in subset))
        strata.append(
            Stratum(
                name="Z" + "_".join(str(i) for i in subset),
                dim=2 * (len(subset) - 1),
                gamma_order=g,
                betti=(1,) * len(subset),
                chern_pairing=pairing,
                normal_weights=tuple(x for i, x in enumerate(a) if i not in subset),
                bundle_degree=k,
            )
        )
    label = f"P({','.join(map(str, a))})[k={k}]"
    return _checked(
        OrbifoldBase(n=n, strata=tuple(strata), w=(k,), w_tilde=(Fraction(sum(a)),), label=label)
    )


def _stratum_from_mapping(data: Mapping, index: int) -> tuple[Stratum, list[str]]:
    failures = []
    odd = data.get("odd_betti", ())
    if any(int(b) != 0 for b in odd):
        failures.append(
            f"stratum {data.get('name', index)}: odd-degree Betti numbers must vanish "
            "(Morse-Bott critical sets of a moment map have even index)"
        )
    stratum = Stratum(
        name=str(data.get("name", "top" if index == 0 else f"S{index}")),
        dim=int(data["dim"]),
        gamma_order=int(data.get("gamma_order", 1)),
        betti=tuple(data["betti"]),
        chern_pairing=data["chern_pairing"],
        normal_weights=tuple(data.get("normal_weights", ())),
        bundle_degree=int(data.get("bundle_degree", 1)),
    )
    return stratum, failures


def custom(
    n: int,
    strata: Sequence[Union[Stratum, Mapping]],
    w: Sequence[int],
    w_tilde: Sequence[Rational],
) -> OrbifoldBase:
    """Validated base from explicit data (e.g. a homogeneous G/P with known Betti numbers).

    Strata may be ``Stratum`` objects or mappings with keys ``name``, ``dim``,
    ``gamma_order``, ``betti`` (even degrees), ``chern_pairing`` and
    optionally ``odd_betti``, which must be all zero.
    """
    failures: list[str] = []
    built = []
    for i, s in enumerate(strata):
        if isinstance(s, Stratum):
            built.append(s)
            continue
        try:
            stratum, errs = _stratum_from_mapping(s, i)
        except (KeyError, TypeError, ValueError) as exc:
            failures.append(f"stratum {i}: malformed entry ({exc})")
            continue
        failures += errs
        built.append(stratum)
    try:
        base = OrbifoldBase(n=int(n), strata=tuple(built), w=tuple(w), w_tilde=tuple(w_tilde))
    except (TypeError, ValueError) as exc:
        raise BaseValidationError(failures + [f"malformed weights ({exc})"]) from exc
    failures += validate(base)
    if failures:
        raise BaseValidationError(failures)
    return base


def sum_w_tilde(base: OrbifoldBase) -> Fraction:
    return sum(base.w_tilde, Fraction(0))
