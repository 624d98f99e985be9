"""Conley-Zehnder and Robbin-Salamon indices of paths of symplectic matrices.

Matrices act on R^{2n} with coordinates (x_1..x_n, y_1..y_n) and the standard
complex structure ``J0 = [[0, -I], [I, 0]]``. The symplectic pairing is
``omega0(u, v) = <J0 u, v>``, so that the crossing form of ``exp(J0 S t)`` at
``t = 0`` is the quadratic form of ``S`` itself.

Indices are computed from crossings, i.e. zeros of ``t -> det(Phi(t) - I)``.
Crossings are located on a sample grid and refined numerically; everything
downstream of the refinement (signatures, half-integers) is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg, optimize

Matrix = np.ndarray
Evaluator = Callable[[float], Matrix]
BatchEvaluator = Callable[[np.ndarray], np.ndarray]


class DegeneratePathError(ValueError):
    """The path has non-isolated or non-regular crossings and must be perturbed."""


class DegenerateEndpointError(ValueError):
    """The terminal matrix has eigenvalue 1, so only the Robbin-Salamon index applies."""


@dataclass(frozen=True)
class Tolerances:
    sym: float = 1e-8
    cross: float = 1e-8
    t: float = 1e-10
    ker: float = 1e-6


DEFAULT_TOLERANCES = Tolerances()


def standard_j(n: int) -> Matrix:
    """Return the 2n x 2n matrix ``[[0, -I], [I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _dimension(M: Matrix) -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise ValueError(f"symplectic matrices have even size, got {M.shape[0]}")
    return M.shape[0] // 2


def symplectic_defect(M: Matrix) -> float:
    """Sup-norm of ``M^T J0 M - J0``."""
    J = standard_j(_dimension(M))
    return float(np.max(np.abs(M.T @ J @ M - J)))


def check_symplectic(M: Matrix, tol: float = DEFAULT_TOLERANCES.sym) -> bool:
    """True iff ``||M^T J0 M - J0||_inf <= tol``.

    Raises ``ValueError`` for odd or non-square input.
    """
    return symplectic_defect(np.asarray(M, dtype=float)) <= tol


def is_hamiltonian(A: Matrix, tol: float = DEFAULT_TOLERANCES.sym) -> bool:
    """True iff ``A`` lies in the Lie algebra sp(2n), i.e. ``A^T J0 + J0 A = 0``."""
    J = standard_j(_dimension(A))
    return float(np.max(np.abs(A.T @ J + J @ A))) <= tol


def signature(S: Matrix, tol: float = DEFAULT_TOLERANCES.ker) -> int:
    """Number of eigenvalues above ``tol`` minus the number below ``-tol``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.size == 0:
        return 0
    eig = np.linalg.eigvalsh((S + S.T) / 2)
    return int(np.sum(eig > tol) - np.sum(eig < -tol))


class SymplecticPath:
    """A path ``t -> Phi(t)`` in Sp(2n), ``t`` in ``[0, T]``, starting at the identity.

    ``evaluate`` maps a float to a 2n x 2n array. ``derivative`` is optional;
    without it a central difference with step ``T / (10 * grid_points)`` is
    used (one-sided at the ends of the interval). ``evaluate_many`` may be
    given as a vectorised evaluator for the sampling grid.
    """

    def __init__(
        self,
        n: int,
        T: float,
        evaluate: Evaluator,
        derivative: Optional[Evaluator] = None,
        grid_points: int = 200,
        evaluate_many: Optional[BatchEvaluator] = None,
    ):
        if n < 1:
            raise ValueError("n must be positive")
        if not T > 0:
            raise ValueError("terminal time T must be positive")
        if grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        self.n = int(n)
        self.T = float(T)
        self.grid_points = int(grid_points)
        self._evaluate = evaluate
        self._derivative = derivative
        self._evaluate_many = evaluate_many

    def __call__(self, t: float) -> Matrix:
        return np.asarray(self._evaluate(float(t)), dtype=float)

    def __repr__(self) -> str:
        return f"SymplecticPath(n={self.n}, T={self.T}, grid_points={self.grid_points})"

    @property
    def has_analytic_derivative(self) -> bool:
        return self._derivative is not None

    def derivative(self, t: float) -> Matrix:
        if self._derivative is not None:
            return np.asarray(self._derivative(float(t)), dtype=float)
        h = self.T / (10 * self.grid_points)
        if t - h < 0:
            return (-3 * self(t) + 4 * self(t + h) - self(t + 2 * h)) / (2 * h)
        if t + h > self.T:
            return (3 * self(t) - 4 * self(t - h) + self(t - 2 * h)) / (2 * h)
        return (self(t + h) - self(t - h)) / (2 * h)

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self._evaluate_many is not None:
            return np.asarray(self._evaluate_many(ts), dtype=float)
        return np.stack([self(t) for t in ts])

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.grid_points)

    def with_grid(self, grid_points: int) -> "SymplecticPath":
        return SymplecticPath(
            self.n, self.T, self._evaluate, self._derivative, grid_points, self._evaluate_many
        )

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int = 1, T: float = 1.0, grid_points: int = 200) -> "SymplecticPath":
        eye = np.eye(2 * n)
        zero = np.zeros((2 * n, 2 * n))
        return cls(
            n,
            T,
            lambda t: eye.copy(),
            lambda t: zero.copy(),
            grid_points,
            lambda ts: np.broadcast_to(eye, (len(ts), 2 * n, 2 * n)).copy(),
        )

    @classmethod
    def exponential(
        cls, generator: Matrix, T: float = 1.0, grid_points: int = 200
    ) -> "SymplecticPath":
        """The one-parameter subgroup ``t -> exp(t A)`` for ``A`` in sp(2n)."""
        A = np.asarray(generator, dtype=float)
        n = _dimension(A)
        if not is_hamiltonian(A, tol=1e-9 * max(1.0, float(np.max(np.abs(A))))):
            raise ValueError("generator is not in sp(2n): A^T J0 + J0 A != 0")
        evaluate_many = _exp_batch(A)

        def evaluate(t: float) -> Matrix:
            return evaluate_many(np.array([t]))[0]

        def derivative(t: float) -> Matrix:
            return A @ evaluate(t)

        return cls(n, T, evaluate, derivative, grid_points, evaluate_many)

    @classmethod
    def hamiltonian_flow(
        cls, symmetric: Matrix, T: float = 1.0, grid_points: int = 200
    ) -> "SymplecticPath":
        """The path ``t -> exp(J0 S t)`` generated by a symmetric matrix ``S``."""
        S = np.asarray(symmetric, dtype=float)
        if not np.allclose(S, S.T, atol=1e-12):
            raise ValueError("S must be symmetric")
        return cls.exponential(standard_j(_dimension(S)) @ S, T, grid_points)

    # -- path algebra ------------------------------------------------------

    def catenate(self, other: "SymplecticPath") -> "SymplecticPath":
        """Run ``self`` on ``[0, T1]`` then ``self(T1) @ other(t - T1)``."""
        if other.n != self.n:
            raise ValueError("catenated paths must have the same dimension")
        first, second = self, other
        T1 = first.T
        end = first(T1)

        def evaluate(t: float) -> Matrix:
            return first(t) if t <= T1 else end @ second(t - T1)

        def derivative(t: float) -> Matrix:
            return first.derivative(t) if t <= T1 else end @ second.derivative(t - T1)

        def evaluate_many(ts: np.ndarray) -> np.ndarray:
            out = np.empty((len(ts), 2 * self.n, 2 * self.n))
            head = ts <= T1
            if head.any():
                out[head] = first.sample(ts[head])
            if (~head).any():
                out[~head] = end @ second.sample(ts[~head] - T1)
            return out

        return SymplecticPath(
            self.n,
            T1 + second.T,
            evaluate,
            derivative,
            first.grid_points + second.grid_points,
            evaluate_many,
        )

    def direct_sum(self, other: "SymplecticPath") -> "SymplecticPath":
        """Block sum on R^{2n'} (+) R^{2n''} = R^{2(n'+n'')}, symplectic coordinates kept."""
        if not math.isclose(self.T, other.T):
            raise ValueError("direct sum needs paths on the same interval")
        n1, n2 = self.n, other.n
        embed = _direct_sum_embedding(n1, n2)

        def combine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
            return embed(A, B)

        return SymplecticPath(
            n1 + n2,
            self.T,
            lambda t: combine(self(t), other(t)),
            lambda t: combine(self.derivative(t), other.derivative(t)),
            max(self.grid_points, other.grid_points),
            lambda ts: combine(self.sample(ts), other.sample(ts)),
        )

    def conjugate(self, M: Matrix) -> "SymplecticPath":
        """The path ``t -> M Phi(t) M^{-1}`` for a fixed symplectic ``M``."""
        M = np.asarray(M, dtype=float)
        if _dimension(M) != self.n:
            raise ValueError("conjugating matrix has the wrong size")
        if not check_symplectic(M, tol=1e-8 * max(1.0, float(np.max(np.abs(M))) ** 2)):
            raise ValueError("conjugating matrix is not symplectic")
        Minv = np.linalg.inv(M)
        return SymplecticPath(
            self.n,
            self.T,
            lambda t: M @ self(t) @ Minv,
            lambda t: M @ self.derivative(t) @ Minv,
            self.grid_points,
            lambda ts: M @ self.sample(ts) @ Minv,
        )

    def product(self, other: "SymplecticPath") -> "SymplecticPath":
        """Pointwise product ``t -> self(t) @ other(t)``."""
        if other.n != self.n or not math.isclose(self.T, other.T):
            raise ValueError("pointwise product needs paths of equal size and length")
        return SymplecticPath(
            self.n,
            self.T,
            lambda t: self(t) @ other(t),
            lambda t: self.derivative(t) @ other(t) + self(t) @ other.derivative(t),
            max(self.grid_points, other.grid_points),
            lambda ts: self.sample(ts) @ other.sample(ts),
        )


def _exp_batch(A: Matrix) -> BatchEvaluator:
    w, V = np.linalg.eig(A)
    if np.linalg.cond(V) < 1e6:
        Vinv = np.linalg.inv(V)

        def evaluate_many(ts: np.ndarray) -> np.ndarray:
            ts = np.asarray(ts, dtype=float)
            scaled = np.exp(np.multiply.outer(ts, w))
            return np.real((V * scaled[:, None, :]) @ Vinv)

        return evaluate_many

    def evaluate_many_expm(ts: np.ndarray) -> np.ndarray:
        return np.stack([linalg.expm(t * A) for t in np.asarray(ts, dtype=float)])

    return evaluate_many_expm


def _direct_sum_embedding(n1: int, n2: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    n = n1 + n2
    idx1 = np.r_[0:n1, n:n + n1]
    idx2 = np.r_[n1:n, n + n1:2 * n]

    def embed(A: np.ndarray, B: np.ndarray) -> np.ndarray:
        out = np.zeros(A.shape[:-2] + (2 * n, 2 * n))
        out[..., idx1[:, None], idx1[None, :]] = A
        out[..., idx2[:, None], idx2[None, :]] = B
        return out

    return embed


@dataclass(frozen=True)
class Crossing:
    t: float
    kernel_basis: np.ndarray = field(repr=False)
    form: np.ndarray = field(repr=False)
    signature: int

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]


def _min_singular(M: np.ndarray) -> np.ndarray:
    return np.linalg.svd(M, compute_uv=False)[..., -1]


def _crossing_at(path: SymplecticPath, t: float, tol: Tolerances) -> Crossing:
    dim = 2 * path.n
    _, s, vh = np.linalg.svd(path(t) - np.eye(dim))
    kernel = vh[s < tol.ker].T
    if kernel.shape[1] == 0:
        raise DegeneratePathError(f"no kernel found at refined crossing t={t:.12g}")
    J = standard_j(path.n)
    form = kernel.T @ J.T @ path.derivative(t) @ kernel
    form = (form + form.T) / 2
    eig = np.linalg.eigvalsh(form)
    if np.any(np.abs(eig) <= tol.ker):
        raise DegeneratePathError(
            f"crossing at t={t:.12g} is not regular (degenerate crossing form); "
            "perturb the path by a small homotopy with fixed endpoints"
        )
    return Crossing(t=t, kernel_basis=kernel, form=form, signature=signature(form, tol.ker))


def find_crossings(
    path: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[Crossing]:
    """All crossings of ``path``, in increasing order of ``t``.

    ``t = 0`` is always reported. Interior crossings are bracketed on the
    sample grid either by a sign change of ``det(Phi - I)`` (bisection) or by
    a local minimum of the smallest singular value of ``Phi - I``, which is
    resampled on a finer grid before refinement. Minima catch elliptic
    crossings, where the determinant touches zero without changing sign, and
    pairs of crossings closer than one grid cell. ``t = T`` is reported when ``|det(Phi(T) - I)|`` is below
    ``tol.cross``.
    """
    dim = 2 * path.n
    eye = np.eye(dim)
    ts = path.grid()
    mats = path.sample(ts)
    _validate_samples(path, ts, mats, tol)

    shifted = mats - eye
    smin = _min_singular(shifted)
    dets = np.linalg.det(shifted)
    h_cell = ts[1] - ts[0]

    zero = smin < tol.ker
    zero[0] = False
    run = 0
    for i, z in enumerate(zero):
        run = run + 1 if z else 0
        if run > 3:
            raise DegeneratePathError(
                f"det(Phi(t) - I) vanishes on an interval around t={ts[i]:.6g}; "
                "one can always homotope the path to one with isolated regular "
                "crossings, so perturb it and retry"
            )

    def smin_at(t: float) -> float:
        return float(_min_singular(path(t) - eye))

    def det_at(t: float) -> float:
        return float(np.linalg.det(path(t) - eye))

    found = _scan(path, ts, smin, dets, det_at, smin_at, tol, depth=0)

    snap = max(100 * tol.t, 1e-3 * h_cell)
    interior: list[float] = []
    for t in sorted(found):
        if t < snap or t > path.T - snap:
            continue
        if interior and t - interior[-1] < snap:
            continue
        value = smin_at(t)
        if value < tol.ker:
            interior.append(t)
        elif value < 1e3 * tol.ker:
            raise DegeneratePathError(
                f"near-crossing at t={t:.12g} (smallest singular value {value:.3g}); "
                "cannot decide whether it is a crossing at the current tolerances"
            )

    crossings = [_crossing_at(path, 0.0, tol)]
    crossings += [_crossing_at(path, t, tol) for t in interior]
    if abs(det_at(path.T)) < tol.cross or smin_at(path.T) < tol.ker:
        crossings.append(_crossing_at(path, path.T, tol))
    return crossings


_ZOOM_POINTS = 33
_ZOOM_DEPTH = 2


def _scan(
    path: SymplecticPath,
    ts: np.ndarray,
    smin: np.ndarray,
    dets: np.ndarray,
    det_at: Callable[[float], float],
    smin_at: Callable[[float], float],
    tol: Tolerances,
    depth: int,
) -> list[float]:
    """Candidate crossing times on one sample grid.

    A sign change of the determinant is refined by bisection. A local minimum
    of the smallest singular value is resampled more finely, since two close
    crossings inside one cell cancel in the determinant; at the deepest level
    the minimum is refined directly.
    """
    found: list[float] = []
    last = len(ts) - 1
    for i in range(last):
        if dets[i] == 0.0:
            found.append(float(ts[i]))
        elif dets[i] * dets[i + 1] < 0:
            found.append(optimize.brentq(det_at, ts[i], ts[i + 1], xtol=tol.t))
    eye = np.eye(2 * path.n)
    for i in range(1, last + 1):
        right = smin[i + 1] if i < last else np.inf
        if not (smin[i] <= smin[i - 1] and smin[i] <= right):
            continue
        a, b = ts[i - 1], ts[min(i + 1, last)]
        if depth < _ZOOM_DEPTH:
            fine = np.linspace(a, b, _ZOOM_POINTS)
            shifted = path.sample(fine) - eye
            found += _scan(
                path, fine, _min_singular(shifted), np.linalg.det(shifted),
                det_at, smin_at, tol, depth + 1,
            )
        else:
            found.append(_valley_bottom(smin_at, a, b, tol.t))
    return found


def _valley_bottom(fn: Callable[[float], float], a: float, b: float, xtol: float) -> float:
    # Bisection on the sign of the slope; the smallest singular value is
    # V-shaped at a regular crossing, so golden-section steps would stall.
    eps = xtol / 4
    while b - a > xtol:
        mid = (a + b) / 2
        if fn(mid + eps) < fn(mid - eps):
            a = mid
        else:
            b = mid
    return float((a + b) / 2)


def _validate_samples(
    path: SymplecticPath, ts: np.ndarray, mats: np.ndarray, tol: Tolerances
) -> None:
    dim = 2 * path.n
    if mats.shape != (len(ts), dim, dim):
        raise ValueError(f"path evaluates to shape {mats.shape[1:]}, expected {(dim, dim)}")
    if np.max(np.abs(mats[0] - np.eye(dim))) > tol.sym:
        raise ValueError("path must start at the identity")
    J = standard_j(path.n)
    scale = np.maximum(1.0, np.max(np.abs(mats), axis=(1, 2))) ** 2
    defect = np.max(np.abs(np.swapaxes(mats, 1, 2) @ J @ mats - J), axis=(1, 2))
    bad = np.nonzero(defect > tol.sym * scale)[0]
    if bad.size:
        i = bad[0]
        raise ValueError(f"path leaves Sp(2n) at t={ts[i]:.6g} (defect {defect[i]:.3g})")


def _is_stationary(path: SymplecticPath, tol: Tolerances) -> bool:
    mats = path.sample(path.grid())
    return bool(np.max(np.abs(mats - np.eye(2 * path.n))) <= tol.sym)


def rs_index(path: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> Fraction:
    """Robbin-Salamon index: half signature at both ends plus interior signatures."""
    if _is_stationary(path, tol):
        return Fraction(0)
    crossings = find_crossings(path, tol)
    total = Fraction(crossings[0].signature, 2)
    for c in crossings[1:]:
        if c.t >= path.T:
            total += Fraction(c.signature, 2)
        else:
            total += c.signature
    return total


def conley_zehnder(path: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Conley-Zehnder index of a path whose endpoint has no eigenvalue 1."""
    if _is_stationary(path, tol):
        raise DegenerateEndpointError("degenerate endpoint: use rs_index")
    crossings = find_crossings(path, tol)
    if len(crossings) > 1 and crossings[-1].t >= path.T:
        raise DegenerateEndpointError("degenerate endpoint: use rs_index")
    total = Fraction(crossings[0].signature, 2) + sum(c.signature for c in crossings[1:])
    if total.denominator != 1:
        raise ArithmeticError(f"Conley-Zehnder index {total} of a nondegenerate path is not an integer")
    return int(total)


def loop_maslov(path: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Maslov index of a loop based at the identity."""
    eye = np.eye(2 * path.n)
    for t in (0.0, path.T):
        if np.max(np.abs(path(t) - eye)) > tol.sym:
            raise ValueError(f"loop must start and end at the identity (fails at t={t})")
    value = rs_index(path, tol)
    if value.denominator != 1:
        raise ArithmeticError(f"loop index {value} is not an integer")
    return int(value)
