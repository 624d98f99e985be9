"""Random symplectic paths with known indices, built from 2x2 blocks.

A rotation block turning ``x`` times has index ``rho(x)``: ``2x`` for integer
``x`` and ``2 floor(x) + 1`` otherwise. A hyperbolic block has index 0. Both
are invariant under conjugation, so a conjugated direct sum of blocks has the
sum of the block indices. Turn counts are multiples of 1/4 so that crossings of
different blocks either coincide exactly or sit well apart on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from reeb_grader.symplectic_paths import SymplecticPath, standard_j


def rho(x: Fraction) -> int:
    if x.denominator == 1:
        return 2 * int(x)
    return 2 * math.floor(x) + 1


def rotation_generator(turns: Fraction, T: float = 1.0) -> np.ndarray:
    return 2 * math.pi * float(turns) / T * standard_j(1)


def hyperbolic_generator(rate: float) -> np.ndarray:
    return np.diag([rate, -rate])


def block_sum(blocks: list[np.ndarray]) -> np.ndarray:
    """Direct sum of 2x2 Hamiltonian generators in (x_1..x_n, y_1..y_n) coordinates."""
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n))
    for i, B in enumerate(blocks):
        idx = [i, n + i]
        out[np.ix_(idx, idx)] = B
    return out


def random_symplectic(rng: np.random.Generator, n: int, strength: float = 0.6) -> np.ndarray:
    """Product of an upper and a lower symplectic shear with symmetric off-diagonal blocks."""
    def sym() -> np.ndarray:
        X = rng.uniform(-strength, strength, (n, n))
        return (X + X.T) / 2

    eye, zero = np.eye(n), np.zeros((n, n))
    upper = np.block([[eye, sym()], [zero, eye]])
    lower = np.block([[eye, zero], [sym(), eye]])
    return upper @ lower


@dataclass
class BlockPath:
    generator: np.ndarray
    index: Fraction
    turns: tuple[Fraction | None, ...]
    conjugator: np.ndarray

    def path(self, T: float = 1.0, grid_points: int = 200) -> SymplecticPath:
        M = self.conjugator
        A = M @ self.generator @ np.linalg.inv(M)
        return SymplecticPath.exponential(A, T, grid_points)


def random_turns(rng: np.random.Generator, integer: bool = False, span: int = 3) -> Fraction:
    q = 1 if integer else 4
    while True:
        x = Fraction(int(rng.integers(-q * span, q * span + 1)), q)
        if x != 0:
            return x


def random_block_path(
    rng: np.random.Generator,
    n: int | None = None,
    nondegenerate: bool = True,
    allow_hyperbolic: bool = True,
    conjugate: bool = True,
) -> BlockPath:
    """Conjugated direct sum of rotation and hyperbolic blocks with its closed-form index."""
    n = n or int(rng.integers(1, 4))
    blocks, turns, index = [], [], Fraction(0)
    for _ in range(n):
        if allow_hyperbolic and rng.random() < 0.3:
            rate = float(rng.uniform(0.3, 2.0)) * (1 if rng.random() < 0.5 else -1)
            blocks.append(hyperbolic_generator(rate))
            turns.append(None)
            continue
        x = random_turns(rng)
        while nondegenerate and x.denominator == 1:
            x = random_turns(rng)
        blocks.append(rotation_generator(x))
        turns.append(x)
        index += rho(x)
    M = random_symplectic(rng, n) if conjugate else np.eye(2 * n)
    return BlockPath(block_sum(blocks), index, tuple(turns), M)


def random_symmetric(rng: np.random.Generator, n: int, bound: float = 5.5) -> tuple[np.ndarray, int]:
    """A nondegenerate symmetric matrix of operator norm below ``bound`` and its signature."""
    Q, _ = np.linalg.qr(rng.normal(size=(2 * n, 2 * n)))
    eig = rng.uniform(0.3, bound, 2 * n) * rng.choice([-1.0, 1.0], 2 * n)
    S = Q @ np.diag(eig) @ Q.T
    return (S + S.T) / 2, int(np.sum(eig > 0) - np.sum(eig < 0))


def random_hyperbolic(rng: np.random.Generator, n: int) -> np.ndarray:
    """``diag(K, -K^T)`` with K real-diagonalizable and invertible: spectrum off the unit circle for t > 0."""
    d = rng.uniform(0.3, 2.0, n) * rng.choice([-1.0, 1.0], n)
    P = np.eye(n) + rng.uniform(-0.4, 0.4, (n, n))
    K = P @ np.diag(d) @ np.linalg.inv(P)
    zero = np.zeros((n, n))
    return np.block([[K, zero], [zero, -K.T]])


# -- one randomized instance of each index axiom: returns (computed, expected) --

from reeb_grader.symplectic_paths import conley_zehnder, loop_maslov, rs_index  # noqa: E402


def signature_case(rng: np.random.Generator):
    n = int(rng.integers(1, 3))
    S, sig = random_symmetric(rng, n)
    path = SymplecticPath.hamiltonian_flow(S, 1.0)
    return conley_zehnder(path), Fraction(sig, 2)


def zero_case(rng: np.random.Generator):
    n = int(rng.integers(1, 4))
    A = random_hyperbolic(rng, n)
    M = random_symplectic(rng, n)
    path = SymplecticPath.exponential(M @ A @ np.linalg.inv(M), float(rng.uniform(0.5, 2.0)))
    return conley_zehnder(path), 0


def loop_case(rng: np.random.Generator):
    n = int(rng.integers(1, 3))
    phi = random_block_path(rng, n)
    turns = [random_turns(rng, integer=True, span=2) for _ in range(n)]
    M = random_symplectic(rng, n)
    psi = BlockPath(block_sum([rotation_generator(k) for k in turns]), Fraction(0), tuple(turns), M)
    loop = psi.path()
    combined = loop.product(phi.path())
    expected_loop = 2 * sum(turns)
    got_loop = loop_maslov(loop)
    if got_loop != expected_loop:
        return (got_loop, "loop"), (expected_loop, "loop")
    return conley_zehnder(combined), conley_zehnder(phi.path()) + got_loop


def catenation_case(rng: np.random.Generator):
    """Run p, then p(T1) q with q turning each block further in the same frame.

    The tail of each rotation block moves from ``a`` to ``a + b`` turns and
    contributes ``rho(a + b) - rho(a)``; hyperbolic blocks contribute 0. When
    ``p`` is a loop this reduces to ``index(p) + index(q)``.
    """
    n = int(rng.integers(1, 3))
    loop_head = rng.random() < 0.3
    M = random_symplectic(rng, n)
    head, tail, expected_tail = [], [], Fraction(0)
    q_index = Fraction(0)
    for _ in range(n):
        if not loop_head and rng.random() < 0.25:
            head.append(hyperbolic_generator(float(rng.uniform(0.3, 2.0))))
            tail.append(hyperbolic_generator(float(rng.uniform(0.3, 2.0))))
            continue
        a = random_turns(rng, integer=loop_head)
        while not loop_head and a.denominator == 1:
            a = random_turns(rng)
        b = random_turns(rng)
        if loop_head:
            # same direction on both sides of the junction keeps the crossing there regular
            b = abs(b) if a > 0 else -abs(b)
        head.append(rotation_generator(a))
        tail.append(rotation_generator(b))
        expected_tail += rho(a + b) - rho(a)
        q_index += rho(b)
    p = BlockPath(block_sum(head), Fraction(0), (), M).path()
    q = BlockPath(block_sum(tail), Fraction(0), (), M).path()
    whole = rs_index(p.catenate(q))
    if loop_head:
        return whole, rs_index(p) + rs_index(q)
    return whole, rs_index(p) + expected_tail


def direct_sum_case(rng: np.random.Generator):
    p = random_block_path(rng, int(rng.integers(1, 3)), nondegenerate=rng.random() < 0.5)
    q = random_block_path(rng, int(rng.integers(1, 3)), nondegenerate=rng.random() < 0.5)
    total = rs_index(p.path().direct_sum(q.path()))
    return total, p.index + q.index


def naturality_case(rng: np.random.Generator):
    p = random_block_path(rng, nondegenerate=rng.random() < 0.5)
    path = p.path()
    M = random_symplectic(rng, path.n, strength=0.8)
    return rs_index(path.conjugate(M)), rs_index(path)


AXIOMS = {
    "signature": signature_case,
    "zero": zero_case,
    "loop": loop_case,
    "catenation": catenation_case,
    "direct_sum": direct_sum_case,
    "naturality": naturality_case,
}
