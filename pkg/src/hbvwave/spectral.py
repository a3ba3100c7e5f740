"""Dense small-matrix spectral utilities.

Gershgorin row discs, overlap partitions and a self-contained eigensolver
for real matrices up to dimension 16.  Matrices are plain numpy arrays with
row-major semantics; ``as_square_matrix`` is the validation gate every
operation runs its input through.

The eigensolver reduces to upper-Hessenberg form by Householder similarity
and then applies implicitly double-shifted orthogonal sweeps until the
active block deflates.  Real Schur-style 2x2 blocks yield exact conjugate
pairs, so the returned spectrum of a real matrix is closed under complex
conjugation by construction.  Each returned eigenvalue should satisfy the
characteristic-polynomial residual bound

    |det(A - lam*I)| <= 1e-9 * n * max(1, ||A||_F)**n

with the determinant evaluated by elimination with partial pivoting
(``char_poly_residual`` / ``residual_bound``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_DIM",
    "Disc",
    "DiscPartition",
    "NoConvergence",
    "NoUnstableDirection",
    "MultipleUnstableDirections",
    "as_square_matrix",
    "deleted_row_sums",
    "gershgorin_discs",
    "connected_components",
    "determinant",
    "char_poly_residual",
    "residual_bound",
    "eigenvalues",
    "unstable_eigenvector",
]

MAX_DIM = 16

# Subdiagonal entries below this relative threshold deflate to zero.
_DEFLATION = 1e-12

# Total sweep budget is _SWEEP_BUDGET_PER_DIM * n.
_SWEEP_BUDGET_PER_DIM = 500


class NoConvergence(RuntimeError):
    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"eigenvalue iteration exhausted its budget after {iterations} sweeps")


class NoUnstableDirection(RuntimeError):
    def __init__(self):
        super().__init__("matrix has no eigenvalue with positive real part")


class MultipleUnstableDirections(RuntimeError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"matrix has {count} eigenvalues with positive real part, expected 1")


@dataclass(frozen=True)
class Disc:
    """Gershgorin disc: center at a diagonal entry, radius the deleted
    absolute row sum.  Centers are real here, but containment accepts
    complex query points."""

    center: float
    radius: float

    def interval(self) -> tuple[float, float]:
        """Intersection with the real axis."""
        return (self.center - self.radius, self.center + self.radius)

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return abs(z - self.center) <= self.radius + tol

    def overlaps(self, other: "Disc") -> bool:
        # Tangency counts as overlap; the existence checker demands strict
        # separation, so the boundary case must land on the overlapping side.
        return abs(self.center - other.center) <= self.radius + other.radius


@dataclass(frozen=True)
class DiscPartition:
    """Partition of disc indices into connected overlap components,
    ordered by leftmost extent."""

    groups: tuple[tuple[int, ...], ...]


def as_square_matrix(entries) -> np.ndarray:
    """Validate and return a float matrix: square, finite, 2 <= n <= 16."""
    A = np.asarray(entries, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if not (2 <= n <= MAX_DIM):
        raise ValueError(f"supported dimensions are 2..{MAX_DIM}, got {n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def deleted_row_sums(A) -> np.ndarray:
    """Row sums of absolute off-diagonal entries."""
    A = as_square_matrix(A)
    return np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))


def gershgorin_discs(A) -> list[Disc]:
    A = as_square_matrix(A)
    radii = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
    return [Disc(float(c), float(r)) for c, r in zip(np.diag(A), radii)]


def connected_components(discs: list[Disc]) -> DiscPartition:
    """Transitive closure of pairwise disc overlap.

    Groups are sorted by the leftmost extent of their union; indices inside
    a group stay in ascending order.
    """
    n = len(discs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if discs[i].overlaps(discs[j]):
                parent[find(i)] = find(j)

    buckets: dict[int, list[int]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(i)
    groups = sorted(
        (tuple(sorted(g)) for g in buckets.values()),
        key=lambda g: min(discs[i].interval()[0] for i in g),
    )
    return DiscPartition(groups=tuple(groups))


def determinant(M) -> float | complex:
    """Determinant by elimination with partial pivoting (real or complex)."""
    U = np.array(M, dtype=complex if np.iscomplexobj(M) else float)
    n = U.shape[0]
    det = U.dtype.type(1.0)
    for k in range(n - 1):
        piv = int(np.argmax(np.abs(U[k:, k]))) + k
        if U[piv, k] == 0.0:
            return det * 0.0
        if piv != k:
            U[[k, piv]] = U[[piv, k]]
            det = -det
        det *= U[k, k]
        factors = U[k + 1 :, k] / U[k, k]
        U[k + 1 :, k:] -= np.outer(factors, U[k, k:])
    det *= U[n - 1, n - 1]
    return complex(det) if np.iscomplexobj(U) else float(det)


def char_poly_residual(A, lam: complex) -> float:
    """|det(A - lam*I)|, the witness that lam is (numerically) an eigenvalue."""
    A = as_square_matrix(A)
    return abs(determinant(A - lam * np.eye(A.shape[0])))


def residual_bound(A) -> float:
    """Scale-adjusted acceptance bound for char_poly_residual."""
    A = as_square_matrix(A)
    n = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A)))
    return 1e-9 * n * scale**n


def _householder_vector(x: np.ndarray) -> np.ndarray | None:
    """Unit Householder vector v with (I - 2vv^T)x = -sign(x0)*||x||*e1,
    or None when x is already a multiple of e1."""
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0 or float(np.linalg.norm(x[1:])) == 0.0:
        return None
    v = x.astype(float).copy()
    v[0] += math.copysign(norm_x, v[0])
    return v / float(np.linalg.norm(v))


def _apply_similarity(H: np.ndarray, v: np.ndarray, start: int) -> None:
    """H := P H P for P = I - 2 v v^T acting on rows/cols start..start+len(v)-1."""
    end = start + v.shape[0]
    H[start:end, :] -= 2.0 * np.outer(v, v @ H[start:end, :])
    H[:, start:end] -= 2.0 * np.outer(H[:, start:end] @ v, v)


def _hessenberg(A: np.ndarray) -> np.ndarray:
    H = A.astype(float).copy()
    n = H.shape[0]
    for k in range(n - 2):
        v = _householder_vector(H[k + 1 :, k])
        if v is None:
            continue
        _apply_similarity(H, v, k + 1)
        H[k + 2 :, k] = 0.0
    return H


def _eig_2x2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    """Eigenvalues of [[a, b], [c, d]], conjugate pairs exact."""
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    disc = half_tr * half_tr - det
    if disc >= 0.0:
        root = math.sqrt(disc)
        if half_tr >= 0.0:
            l1 = half_tr + root
        else:
            l1 = half_tr - root
        l2 = det / l1 if l1 != 0.0 else half_tr - math.copysign(root, half_tr)
        return (complex(l1), complex(l2))
    im = math.sqrt(-disc)
    return (complex(half_tr, -im), complex(half_tr, im))


def _double_shift_sweep(H: np.ndarray, lo: int, hi: int, tr: float, det: float) -> None:
    """One implicit double-shift sweep on the active block H[lo:hi+1, lo:hi+1].

    Introduces the bulge from the first column of (H - s1)(H - s2) and chases
    it out by restoring Hessenberg form of the block; by the implicit-Q
    argument this equals the explicit double-shift orthogonal step.
    """
    x = H[lo, lo] * H[lo, lo] + H[lo, lo + 1] * H[lo + 1, lo] - tr * H[lo, lo] + det
    y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - tr)
    z = H[lo + 2, lo + 1] * H[lo + 1, lo]
    v = _householder_vector(np.array([x, y, z]))
    if v is not None:
        _apply_similarity(H, v, lo)
    for k in range(lo, hi - 1):
        v = _householder_vector(H[k + 1 : hi + 1, k])
        if v is None:
            continue
        _apply_similarity(H, v, k + 1)
        H[k + 2 : hi + 1, k] = 0.0


def eigenvalues(A) -> np.ndarray:
    """All eigenvalues with multiplicity, sorted by (real, imag).

    Conjugate pairs of a real matrix appear together (negative imaginary
    part first).  Raises NoConvergence if the sweep budget (500*n) runs out.
    """
    A = as_square_matrix(A)
    n = A.shape[0]
    H = _hessenberg(A)
    norm_h = float(np.linalg.norm(H)) or 1.0
    budget = _SWEEP_BUDGET_PER_DIM * n
    sweeps = 0
    stalled = 0
    eigs: list[complex] = []
    hi = n - 1
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(H[0, 0]))
            break
        lo = hi
        while lo > 0:
            s = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if s == 0.0:
                s = norm_h
            if abs(H[lo, lo - 1]) <= _DEFLATION * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(H[hi, hi]))
            hi -= 1
            stalled = 0
            continue
        if lo == hi - 1:
            eigs.extend(_eig_2x2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi]))
            hi -= 2
            stalled = 0
            continue
        if sweeps >= budget:
            raise NoConvergence(sweeps)
        sweeps += 1
        stalled += 1
        if stalled % 10 == 0:
            # Exceptional shift to break symmetric cycling.
            sh = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
            tr, det = 2.0 * sh, sh * sh
        else:
            tr = H[hi - 1, hi - 1] + H[hi, hi]
            det = H[hi - 1, hi - 1] * H[hi, hi] - H[hi - 1, hi] * H[hi, hi - 1]
        _double_shift_sweep(H, lo, hi, tr, det)
    eigs.sort(key=lambda z: (z.real, z.imag))
    return np.array(eigs, dtype=complex)


def _solve_pivoted(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """LU solve with partial pivoting; exact zero pivots are nudged so that
    inverse iteration can run on numerically singular shifts."""
    n = M.shape[0]
    U = M.astype(float).copy()
    rhs = b.astype(float).copy()
    tiny = np.finfo(float).eps * max(1.0, float(np.linalg.norm(M)))
    for k in range(n):
        piv = int(np.argmax(np.abs(U[k:, k]))) + k
        if piv != k:
            U[[k, piv]] = U[[piv, k]]
            rhs[[k, piv]] = rhs[[piv, k]]
        if U[k, k] == 0.0:
            U[k, k] = tiny
        if k < n - 1:
            factors = U[k + 1 :, k] / U[k, k]
            U[k + 1 :, k:] -= np.outer(factors, U[k, k:])
            rhs[k + 1 :] -= factors * rhs[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (rhs[k] - U[k, k + 1 :] @ x[k + 1 :]) / U[k, k]
    return x


def unstable_eigenvector(A, positive_component: int | None = None) -> tuple[float, np.ndarray]:
    """The unique positive-real-part eigenvalue and a unit eigenvector.

    Raises NoUnstableDirection / MultipleUnstableDirections(count) when the
    positive-real-part count differs from one.  The eigenvector satisfies
    ||A v - lam v|| <= 1e-9 ||A|| and its sign is normalized so that entry
    ``positive_component`` (largest-magnitude entry when None or when that
    entry vanishes) is positive.
    """
    A = as_square_matrix(A)
    n = A.shape[0]
    eigs = eigenvalues(A)
    unstable = [z for z in eigs if z.real > 0.0]
    if not unstable:
        raise NoUnstableDirection()
    if len(unstable) > 1:
        raise MultipleUnstableDirections(len(unstable))
    lam = unstable[0].real  # the conjugate of a complex root would also count

    norm_a = float(np.linalg.norm(A)) or 1.0
    M = A - lam * np.eye(n)
    v = None
    starts = [np.full(n, 1.0 / math.sqrt(n))] + [np.eye(n)[i] for i in range(n)]
    for start in starts:
        w = start
        for _ in range(5):
            w = _solve_pivoted(M, w)
            w /= float(np.linalg.norm(w))
            if float(np.linalg.norm(A @ w - lam * w)) <= 1e-9 * norm_a:
                v = w
                break
        if v is not None:
            break
    if v is None:
        raise NoConvergence(5 * len(starts))

    idx = positive_component if positive_component is not None else int(np.argmax(np.abs(v)))
    if abs(v[idx]) < 1e-12:
        idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0.0:
        v = -v
    return lam, v
