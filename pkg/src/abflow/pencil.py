"""Alternating pencil iteration for stable deflating subspaces.

Given a regular pencil A - lambda*B, the iteration produces pencils
(A_k, B_k) whose stable deflating subspace emerges as the near-null space
of A_k.  The chain obeys a discrete flow: element i+j is a rational
combination of elements i and j, which is what the accelerated variant in
:mod:`abflow.accel` exploits.  Eigenvalues transform by explicit rational
maps, and the iteration breaks down exactly when the initial pencil's
spectrum meets certain roots of unity.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BreakdownError, PoleEncounteredError, SingularMatrixError
from .linalg import (
    DEFAULT_RANK_TOL,
    SubspaceBasis,
    _as_square,
    lu_factor,
    matrix_power_sum,
    null_space_basis,
    smallest_singular_subspace,
    subspace_distance,
)

#: Absolute tolerance for matching an eigenvalue against a root of unity.
BREAKDOWN_TOL = 1e-9

#: Marker for the point at infinity in eigenvalue maps.
INFINITY = complex(math.inf, 0.0)


@dataclass(frozen=True)
class Pencil:
    """Matrix pencil A - lambda*B with A, B square of equal shape.

    Regularity is not checked eagerly; operations report breakdown when
    a required sum is numerically singular.
    """

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = _as_square(self.A, "A")
        B = _as_square(self.B, "B")
        if A.shape != B.shape:
            raise ValueError(f"A is {A.shape} but B is {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class ABIterate:
    """Element k of the pencil chain.

    Along any chain the difference A_k - B_k stays equal to A_1 - B_1;
    the update below relies on that to get B_k with no extra solve.
    """

    A_k: np.ndarray
    B_k: np.ndarray
    k: int

    def __post_init__(self):
        object.__setattr__(self, "A_k", _as_square(self.A_k, "A_k"))
        object.__setattr__(self, "B_k", _as_square(self.B_k, "B_k"))
        if self.k < 1:
            raise ValueError("iterate index must be positive")


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class SubspaceResult:
    """Outcome of a subspace run.

    ``U`` spans the computed stable deflating subspace, ``Lambda`` is the
    coupling block recovered from the original pencil via least squares,
    and ``residual`` is ||A U - B U Lambda||_F / ||U||_F.  On breakdown,
    ``iterations`` is the chain index that could not be produced and the
    basis is empty.
    """

    U: SubspaceBasis
    Lambda: np.ndarray
    residual: float
    iterations: int
    status: SolveStatus


def first_iterate(pencil: Pencil) -> ABIterate:
    """The chain element of index 1, i.e. the pencil itself."""
    return ABIterate(pencil.A, pencil.B, 1)


def ab_step(initial: Pencil, prev: ABIterate, direct_b: bool = False) -> ABIterate:
    """Advance the chain one step: element ``prev.k`` to ``prev.k + 1``.

    Computes ``A_new = A_1 (A_1 + B_prev)^{-1} A_prev`` and obtains
    ``B_new`` from the constant-difference shortcut ``A_new + B_1 - A_1``.
    With ``direct_b=True`` the rational form
    ``B_new = B_prev (A_1 + B_prev)^{-1} B_1`` is used instead (one more
    solve; retained for cross-checking).

    Raises
    ------
    BreakdownError
        If ``A_1 + B_prev`` is numerically singular, which happens exactly
        when the initial spectrum meets a root of unity of order
        ``prev.k + 1``.
    """
    if initial.n != prev.A_k.shape[0]:
        raise ValueError("iterate shape does not match the initial pencil")
    target = prev.k + 1
    try:
        f = lu_factor(initial.A + prev.B_k)
    except SingularMatrixError as exc:
        raise BreakdownError(
            f"singular sum producing chain element {target}",
            index=target) from exc
    A_new = initial.A @ f.solve(prev.A_k)
    if direct_b:
        B_new = prev.B_k @ f.solve(initial.B)
    else:
        B_new = A_new + initial.B - initial.A
    return ABIterate(A_new, B_new, target)


def combine(it_i: ABIterate, it_j: ABIterate) -> ABIterate:
    """Merge chain elements i and j into element i+j (the flow property).

    ``A_{i+j} = A_i (A_i + B_j)^{-1} A_j`` and
    ``B_{i+j} = B_j (A_i + B_j)^{-1} B_i``.  Both iterates must come from
    the same chain.
    """
    if it_i.A_k.shape != it_j.A_k.shape:
        raise ValueError("iterates have different shapes")
    target = it_i.k + it_j.k
    try:
        f = lu_factor(it_i.A_k + it_j.B_k)
    except SingularMatrixError as exc:
        raise BreakdownError(
            f"singular sum producing chain element {target}",
            index=target) from exc
    return ABIterate(it_i.A_k @ f.solve(it_j.A_k),
                     it_j.B_k @ f.solve(it_i.B_k),
                     target)


def closed_form_iterate(A1, k: int) -> ABIterate:
    """Chain element k in closed form, for an initial pencil with B_1 = I.

    Returns ``(A_1^k P^{-1}, P^{-1}, k)`` with ``P = I + A_1 + ... +
    A_1^{k-1}``.  Serves as an independent oracle for step chains.

    Raises
    ------
    SingularMatrixError
        If the power sum is singular (equivalently, some eigenvalue of
        A_1 is a k-th root of unity other than 1).
    """
    M = _as_square(A1, "A1")
    if k < 1:
        raise ValueError("k must be at least 1")
    f = lu_factor(matrix_power_sum(M, k))
    eye = np.eye(M.shape[0], dtype=np.complex128)
    A_k = f.solve(np.linalg.matrix_power(M, k).T, trans=True).T
    B_k = f.solve(eye)
    return ABIterate(A_k, B_k, k)


def eigenvalue_map(lam, i: int, k: int):
    """Eigenvalue of the cross pencil A_i - mu*B_k induced by ``lam``.

    For finite ``lam`` the value is
    ``lam**i * sum(lam**s, s<k) / sum(lam**s, s<i)``; infinity maps to
    infinity.  At ``lam = 1`` both sums are exact integers and the value
    is exactly ``k / i``.

    Raises
    ------
    PoleEncounteredError
        When the denominator sum vanishes (``lam`` is a nontrivial root
        of unity of order dividing i).
    """
    if i < 1 or k < 1:
        raise ValueError("indices must be positive")
    z = complex(lam)
    if cmath.isnan(z):
        raise ValueError("eigenvalue is NaN")
    if cmath.isinf(z):
        return INFINITY
    num = sum(z ** s for s in range(k))
    den = sum(z ** s for s in range(i))
    if abs(den) <= 1e-12 * i:
        raise PoleEncounteredError(
            f"denominator sum vanishes at lambda={z} with i={i}")
    return z ** i * num / den


def breakdown_check(eigenvalues, kmax: int, tol: float = BREAKDOWN_TOL):
    """Smallest k <= kmax whose breakdown set meets the given spectrum.

    The breakdown set for step k collects all p-th roots of unity except
    1 itself, for p = 2..k+1.  Returns ``None`` when no eigenvalue comes
    within ``tol`` of the set up to ``kmax``.  Producing chain element
    k+1 is what fails when this returns k.
    """
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    lams = [complex(v) for v in eigenvalues]
    lams = [z for z in lams if not cmath.isinf(z)]
    for k in range(1, kmax + 1):
        p = k + 1
        roots = [cmath.exp(2j * math.pi * q / p) for q in range(1, p)]
        for z in lams:
            if any(abs(z - w) <= tol for w in roots):
                return k
    return None


def _extract_basis(A_k: np.ndarray, rank_tol: float,
                   expected_dim: int | None) -> SubspaceBasis:
    if expected_dim is None:
        return null_space_basis(A_k, rank_tol)
    return smallest_singular_subspace(A_k, expected_dim)


def _recover_block(pencil: Pencil, U: SubspaceBasis):
    """Least-squares coupling block of the original pencil on span(U)."""
    m = U.dim
    if m == 0:
        return np.zeros((0, 0), dtype=np.complex128), 0.0
    AU = pencil.A @ U.basis
    BU = pencil.B @ U.basis
    Lam = np.linalg.lstsq(BU, AU, rcond=None)[0]
    residual = float(np.linalg.norm(AU - BU @ Lam, "fro") / math.sqrt(m))
    return Lam, residual


def _breakdown_result(n: int, exc: BreakdownError) -> SubspaceResult:
    empty = SubspaceBasis(np.zeros((n, 0), dtype=np.complex128), np.zeros(0))
    return SubspaceResult(empty, np.zeros((0, 0), dtype=np.complex128),
                          math.nan, exc.index or 0, SolveStatus.BREAKDOWN)


def _finish(pencil: Pencil, basis: SubspaceBasis, iterations: int,
            status: SolveStatus) -> SubspaceResult:
    Lam, residual = _recover_block(pencil, basis)
    return SubspaceResult(basis, Lam, residual, iterations, status)


def ab_run(initial: Pencil, tol: float, kmax: int,
           expected_dim: int | None = None,
           rank_tol: float = DEFAULT_RANK_TOL,
           observer=None) -> SubspaceResult:
    """Run the plain chain until successive near-null spaces stabilize.

    Iterates ``ab_step`` until the distance between the near-null bases
    of consecutive A_k drops below ``tol`` (a step with an empty basis
    counts as distance 1), then recovers the coupling block from the
    original pencil.  When ``expected_dim`` is given, the basis is the
    span of that many smallest singular directions instead of a
    threshold decision.  With widely spread stable eigenvalue magnitudes
    the threshold rule can settle on the fastest-decaying directions
    before slower ones cross the cutoff; the result is then a genuine
    deflating pair of smaller dimension, so supply ``expected_dim`` when
    the stable dimension is known.

    Parameters
    ----------
    initial : Pencil
    tol : float
        Subspace-distance stopping tolerance, positive.
    kmax : int
        Largest chain index to produce, at least 2.
    expected_dim : int, optional
        Known dimension of the stable subspace.
    rank_tol : float
        Relative near-null cutoff used when ``expected_dim`` is None.
    observer : callable, optional
        Called as ``observer(iterate, basis)`` for every chain element
        including the first.

    Returns
    -------
    SubspaceResult
        Status CONVERGED, MAX_ITERATIONS, or BREAKDOWN (breakdown is
        reported, never regularized away).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    it = first_iterate(initial)
    basis_prev = _extract_basis(it.A_k, rank_tol, expected_dim)
    if observer is not None:
        observer(it, basis_prev)
    for _ in range(2, kmax + 1):
        try:
            it = ab_step(initial, it)
        except BreakdownError as exc:
            return _breakdown_result(initial.n, exc)
        basis = _extract_basis(it.A_k, rank_tol, expected_dim)
        if observer is not None:
            observer(it, basis)
        if basis.dim == 0 or basis.dim != basis_prev.dim:
            dist = 1.0
        else:
            dist = subspace_distance(basis_prev, basis)
        if dist < tol:
            return _finish(initial, basis, it.k, SolveStatus.CONVERGED)
        basis_prev = basis
    return _finish(initial, basis_prev, kmax, SolveStatus.MAX_ITERATIONS)
