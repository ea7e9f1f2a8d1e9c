"""Gram matrices on node grids and their raised-cosine decomposition.

The low-rank construction in :mod:`tidict.lowrank` needs a raised-cosine
kernel that reproduces the node Gram matrix exactly: for every pair of grid
nodes, ``rc(theta_i - theta_j)`` must equal ``kappa(theta_i - theta_j)``.
On a regular 1-D grid with spacing ``D`` this reduces to matching the first
Gram row, i.e. finding frequencies and positive weights with

    g_m = lambda0 + sum_k lambda_k cos(m * w_k * D),   m = 0 .. L-1,

a classical exponential-recovery problem.  It is solved here in the
Chebyshev basis: extending ``g`` evenly, the symmetrized shift
``(S g)_m = (g_{m+1} + g_{m-1}) / 2`` acts as multiplication by
``x = cos(w D)``, so the sequence is annihilated by a monic degree-K
polynomial in ``S`` whose roots are exactly the ``cos(w_k D)``.  Working in
the Chebyshev basis keeps the companion (colleague) eigenproblem well
conditioned on [-1, 1], where all roots must lie.  For odd ``L`` the
constant term is removed first by differencing ``(S - I) g``, which keeps
the remaining root count at ``K = floor(L / 2)``.

Multi-dimensional grids are handled separably: each axis is decomposed on
its own, then the product of per-axis kernels is expanded into a flat
cosine sum via the product-to-sum identity.  The resulting term count again
satisfies ``K = floor(L / 2)`` with ``L`` the total node count, and the
Gram matrix is the Kronecker product of the per-axis Toeplitz factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import numpy.polynomial.chebyshev as ncheb
import scipy.linalg

from .errors import DomainError, IllConditionedError, NoValidDecomposition
from .kernels import TIKernel
from .raised_cosine import FREQ_DISTINCT_TOL, WEIGHT_PRUNE_TOL, RaisedCosineKernel

__all__ = [
    "NodeGrid",
    "GramSystem",
    "DecompositionReport",
    "build_gram",
    "decompose_gram_1d",
    "decompose_gram_separable",
    "decompose_grid",
    "verify_decomposition",
]

CONDITION_LIMIT = 1e12
RESIDUAL_TOL = 1e-8
ROOT_IMAG_TOL = 1e-9
ROOT_RANGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NodeGrid:
    """Regular lattice of interpolation nodes.

    ``origin`` is the first node, ``spacing`` the positive step per axis and
    ``counts`` the number of nodes per axis.  Nodes are ordered row-major
    (the last axis varies fastest), matching the Kronecker ordering of the
    Gram factors.
    """

    origin: np.ndarray
    spacing: np.ndarray
    counts: tuple

    def __post_init__(self) -> None:
        org = np.atleast_1d(np.asarray(self.origin, dtype=float))
        spc = np.atleast_1d(np.asarray(self.spacing, dtype=float))
        cnt = np.atleast_1d(np.asarray(self.counts, dtype=int))
        if not (org.shape == spc.shape == cnt.shape) or org.ndim != 1:
            raise DomainError("origin, spacing and counts must have equal length")
        if not np.all(np.isfinite(org)) or not np.all(np.isfinite(spc)):
            raise DomainError("grid origin and spacing must be finite")
        if np.any(spc <= 0.0):
            raise DomainError(f"grid spacing must be positive, got {spc.tolist()}")
        if np.any(cnt < 1):
            raise DomainError(f"grid counts must be >= 1, got {cnt.tolist()}")
        org.setflags(write=False)
        spc.setflags(write=False)
        object.__setattr__(self, "origin", org)
        object.__setattr__(self, "spacing", spc)
        object.__setattr__(self, "counts", tuple(int(c) for c in cnt))

    @property
    def dim(self) -> int:
        return self.origin.shape[0]

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @cached_property
    def indices(self) -> np.ndarray:
        """Integer multi-indices of all nodes, shape ``(size, dim)``, row-major."""
        mesh = np.meshgrid(*[np.arange(c) for c in self.counts], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(size, dim)``."""
        return self.origin + self.indices * self.spacing

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        upper = self.origin + (np.array(self.counts) - 1) * self.spacing
        return self.origin.copy(), upper


class GramSystem:
    """A node Gram matrix with its Cholesky factorization.

    Wraps ``G[i, j] = kappa(theta_i - theta_j)`` together with the
    machinery needed downstream: linear solves against ``G``, the explicit
    inverse, and the 2-norm condition number.  Instances are built by
    :func:`build_gram`.
    """

    def __init__(
        self,
        matrix: np.ndarray,
        nodes: np.ndarray,
        grid: NodeGrid | None = None,
        structure: str = "general",
        condition_limit: float = CONDITION_LIMIT,
    ):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError("Gram matrix must be square")
        if matrix.shape[0] != nodes.shape[0]:
            raise DomainError("node count does not match Gram size")
        self.matrix = matrix
        self.nodes = np.asarray(nodes, dtype=float)
        self.grid = grid
        self.structure = structure
        self.condition_number = float(np.linalg.cond(matrix))
        if not math.isfinite(self.condition_number) or (
            self.condition_number > condition_limit
        ):
            raise IllConditionedError(
                f"Gram condition number {self.condition_number:.3e} exceeds "
                f"limit {condition_limit:.3e}"
            )
        try:
            self._cho = scipy.linalg.cho_factor(matrix, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise IllConditionedError(
                f"Gram matrix is not positive definite: {exc}"
            ) from exc

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``G x = rhs`` for a vector or a stack of columns."""
        return scipy.linalg.cho_solve(self._cho, rhs)

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = self.solve(np.eye(self.size))
        return 0.5 * (inv + inv.T)

    @property
    def first_row(self) -> np.ndarray:
        return self.matrix[0].copy()


def build_gram(
    kernel: TIKernel,
    nodes,
    condition_limit: float = CONDITION_LIMIT,
) -> GramSystem:
    """Assemble the Gram matrix of the atoms at the given nodes.

    Parameters
    ----------
    kernel : TIKernel
        Translation-invariant kernel of the atom family.
    nodes : NodeGrid or array_like, shape (L, dim)
        Interpolation nodes.  Passing a :class:`NodeGrid` computes all
        displacements from integer index differences, which makes the
        Toeplitz (1-D) and Kronecker-of-Toeplitz (separable multi-D)
        structure of the result exact rather than approximate.
    condition_limit : float
        Raise :class:`IllConditionedError` beyond this condition number.
    """
    if isinstance(nodes, NodeGrid):
        grid = nodes
        if grid.dim != kernel.dim:
            raise DomainError(
                f"grid dimension {grid.dim} != kernel dimension {kernel.dim}"
            )
        idx = grid.indices
        delta = (idx[:, None, :] - idx[None, :, :]) * grid.spacing
        L = grid.size
        matrix = kernel.eval(delta.reshape(L * L, grid.dim)).reshape(L, L)
        structure = "toeplitz" if grid.dim == 1 else "kronecker"
        return GramSystem(matrix, grid.nodes, grid, structure, condition_limit)
    pts = np.asarray(nodes, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != kernel.dim:
        raise DomainError(f"nodes must have shape (L, {kernel.dim}), got {pts.shape}")
    delta = pts[:, None, :] - pts[None, :, :]
    L = pts.shape[0]
    matrix = kernel.eval(delta.reshape(L * L, kernel.dim)).reshape(L, L)
    return GramSystem(matrix, pts, None, "general", condition_limit)


def _cheb_annihilator(y: np.ndarray, degree: int) -> np.ndarray:
    """Chebyshev coefficients of the monic annihilating polynomial.

    ``y`` is a sequence known to satisfy a degree-``degree`` recurrence
    under the symmetrized shift.  Builds the linear system whose rows state
    that the polynomial, evaluated on the shift operator, annihilates the
    sequence, and solves for the non-leading coefficients.  In the
    Chebyshev basis the action of ``T_p`` on the evenly-extended sequence is
    ``(T_p y)_m = (y_{m+p} + y_{|m-p|}) / 2``.
    """
    rows = y.shape[0] - degree
    m = np.arange(rows)[:, None]
    p = np.arange(degree + 1)[None, :]
    table = 0.5 * (y[m + p] + y[np.abs(m - p)])
    lead = 2.0 ** (1 - degree)  # monic: x^K has leading Chebyshev coefficient 2^(1-K)
    coef, *_ = np.linalg.lstsq(table[:, :degree], -lead * table[:, degree], rcond=None)
    return np.concatenate([coef, [lead]])


def decompose_gram_1d(
    first_row: np.ndarray,
    spacing: float,
    residual_tol: float = RESIDUAL_TOL,
) -> RaisedCosineKernel:
    """Exact raised-cosine interpolation of a 1-D Gram first row.

    Finds ``K = floor(L/2)`` frequencies and positive weights (plus a
    constant term when ``L`` is odd) whose cosine sum reproduces
    ``first_row`` at every multiple of ``spacing``.  Frequencies are
    returned in parameter units (radians per unit displacement).

    Parameters
    ----------
    first_row : array_like, shape (L,)
        Gram values ``kappa(m * spacing)`` for ``m = 0 .. L-1``; the first
        entry must be 1 (unit-norm atoms).
    spacing : float
        Positive node spacing.
    residual_tol : float
        Maximum tolerated interpolation defect at the nodes.

    Raises
    ------
    NoValidDecomposition
        If the spectral roots are complex or outside [-1, 1] beyond
        tolerance, recovered weights are nonpositive, frequencies collide,
        or the residual exceeds ``residual_tol``.
    """
    g = np.atleast_1d(np.asarray(first_row, dtype=float))
    if g.ndim != 1:
        raise DomainError("first_row must be one-dimensional")
    spacing = float(spacing)
    if not spacing > 0.0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    L = g.shape[0]
    if L < 1:
        raise DomainError("first_row must contain at least one value")
    if abs(g[0] - 1.0) > 1e-12:
        raise DomainError(f"first_row[0] must be 1 for unit-norm atoms, got {g[0]!r}")

    if L == 1:
        return RaisedCosineKernel(
            dim=1, lambda0=1.0, weights=np.empty(0), freqs=np.empty((0, 1)), rank=1
        )

    K = L // 2
    odd = L % 2 == 1
    if odd:
        # remove the constant term: h = (S - I) g, using even extension g[-1] = g[1]
        g_minus = np.concatenate([[g[1]], g[:-2]])
        y = 0.5 * (g[1:] + g_minus) - g[:-1]
    else:
        y = g

    coeffs = _cheb_annihilator(y, K)
    roots = ncheb.chebroots(coeffs)
    if np.max(np.abs(roots.imag)) > ROOT_IMAG_TOL:
        raise NoValidDecomposition(
            f"complex spectral roots (max imaginary part "
            f"{np.max(np.abs(roots.imag)):.3e})"
        )
    x = roots.real
    if np.max(np.abs(x)) > 1.0 + ROOT_RANGE_TOL:
        raise NoValidDecomposition(
            f"spectral roots outside [-1, 1]: {np.sort(x).tolist()}"
        )
    x = np.clip(x, -1.0, 1.0)
    steps = np.sort(np.arccos(x))  # radians per grid step, ascending

    freqs = steps / spacing
    if steps[0] / spacing < FREQ_DISTINCT_TOL:
        raise NoValidDecomposition("a recovered frequency collapses onto zero")
    if K > 1 and np.min(np.diff(freqs)) < FREQ_DISTINCT_TOL:
        raise NoValidDecomposition(
            f"recovered frequencies coalesce: {freqs.tolist()}"
        )

    m = np.arange(L)[:, None]
    design = np.cos(m * steps[None, :])
    if odd:
        design = np.concatenate([np.ones((L, 1)), design], axis=1)
    lam, *_ = np.linalg.lstsq(design, g, rcond=None)
    residual = float(np.max(np.abs(design @ lam - g)))
    if residual > residual_tol:
        raise NoValidDecomposition(
            f"node residual {residual:.3e} exceeds tolerance {residual_tol:g}"
        )
    if np.min(lam) < WEIGHT_PRUNE_TOL:
        raise NoValidDecomposition(
            f"recovered weights are not strictly positive: {lam.tolist()}"
        )
    lambda0 = float(lam[0]) if odd else 0.0
    weights = lam[1:] if odd else lam
    return RaisedCosineKernel(
        dim=1,
        lambda0=lambda0,
        weights=weights,
        freqs=freqs.reshape(-1, 1),
        rank=L,
    )


def _canonical_key(vec: np.ndarray) -> tuple:
    """Sign-canonical tuple key for a frequency vector (+0.0 normalized)."""
    v = np.asarray(vec, dtype=float)
    for c in v:
        if c != 0.0:
            if c < 0.0:
                v = -v
            break
    return tuple(float(c + 0.0) for c in v)


def decompose_gram_separable(
    per_axis: Sequence[RaisedCosineKernel],
) -> RaisedCosineKernel:
    """Combine per-axis 1-D raised-cosine kernels into one multi-D kernel.

    The product of the axis kernels is expanded into a flat cosine sum with
    the identity ``cos(a) cos(b) = (cos(a+b) + cos(a-b)) / 2``; terms whose
    frequency vectors coincide up to sign are merged.  The result has rank
    equal to the product of the axis ranks, with the term count again
    ``floor(rank / 2)``; if accidental frequency collisions break that
    count, :class:`NoValidDecomposition` is raised.
    """
    if len(per_axis) == 0:
        raise DomainError("need at least one axis kernel")
    for rc in per_axis:
        if rc.dim != 1:
            raise DomainError("decompose_gram_separable expects 1-D kernels per axis")

    dim = len(per_axis)
    # accumulate signed half-weight cosine terms, keyed by canonical frequency
    terms: dict = {(0.0,) * dim: per_axis[0].lambda0}
    for k in range(per_axis[0].num_terms):
        vec = np.zeros(dim)
        vec[0] = per_axis[0].freqs[k, 0]
        terms[_canonical_key(vec)] = float(per_axis[0].weights[k])
    for axis in range(1, dim):
        rc = per_axis[axis]
        new: dict = {}
        for key, wgt in sorted(terms.items()):
            base = np.array(key)
            if rc.lambda0 != 0.0:
                k0 = _canonical_key(base)
                new[k0] = new.get(k0, 0.0) + wgt * rc.lambda0
            for k in range(rc.num_terms):
                vec = np.zeros(dim)
                vec[axis] = rc.freqs[k, 0]
                half = 0.5 * wgt * float(rc.weights[k])
                for sign in (1.0, -1.0):
                    kk = _canonical_key(base + sign * vec)
                    new[kk] = new.get(kk, 0.0) + half
        terms = new

    rank = int(np.prod([rc.rank for rc in per_axis]))
    lambda0 = terms.pop((0.0,) * dim, 0.0)
    items = sorted((k, v) for k, v in terms.items() if abs(v) >= WEIGHT_PRUNE_TOL)
    weights = np.array([v for _, v in items])
    freqs = np.array([k for k, _ in items]).reshape(-1, dim)

    expected_terms = rank // 2
    if len(items) != expected_terms:
        raise NoValidDecomposition(
            f"separable expansion produced {len(items)} distinct terms, "
            f"expected {expected_terms}; axis frequencies collide"
        )
    if weights.size and np.min(weights) < WEIGHT_PRUNE_TOL:
        raise NoValidDecomposition(
            f"separable expansion produced nonpositive weights: {weights.tolist()}"
        )
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            d = min(
                float(np.linalg.norm(freqs[i] - freqs[j])),
                float(np.linalg.norm(freqs[i] + freqs[j])),
            )
            if d < FREQ_DISTINCT_TOL:
                raise NoValidDecomposition(
                    f"separable frequencies {i} and {j} coincide up to sign"
                )
    return RaisedCosineKernel(
        dim=dim, lambda0=lambda0, weights=weights, freqs=freqs, rank=rank
    )


def decompose_grid(
    kernel: TIKernel,
    grid: NodeGrid,
    residual_tol: float = RESIDUAL_TOL,
) -> RaisedCosineKernel:
    """Raised-cosine kernel matching ``kernel`` on all node differences of ``grid``.

    For one-dimensional grids this is :func:`decompose_gram_1d` on the Gram
    first row; in higher dimensions each axis is decomposed separately
    (valid for kernels that factor over axes, such as the isotropic
    Gaussian) and the factors are expanded with :func:`decompose_gram_separable`.
    """
    if grid.dim != kernel.dim:
        raise DomainError(
            f"grid dimension {grid.dim} != kernel dimension {kernel.dim}"
        )
    axis_kernels = []
    for a in range(grid.dim):
        m = np.arange(grid.counts[a])
        deltas = np.zeros((grid.counts[a], grid.dim))
        deltas[:, a] = m * grid.spacing[a]
        row = np.atleast_1d(kernel.eval(deltas))
        axis_kernels.append(decompose_gram_1d(row, grid.spacing[a], residual_tol))
    if grid.dim == 1:
        return axis_kernels[0]
    return decompose_gram_separable(axis_kernels)


@dataclass(frozen=True)
class DecompositionReport:
    """Quality of a raised-cosine fit to a Gram matrix.

    ``residual`` is the worst absolute mismatch over all node pairs,
    ``psd_margin`` the smallest eigenvalue of the raised-cosine Gram (it
    should be nonnegative up to roundoff), and ``ok`` whether both pass
    their tolerances.
    """

    residual: float
    psd_margin: float
    ok: bool

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "psd_margin": self.psd_margin,
            "ok": self.ok,
        }


def verify_decomposition(
    gram: GramSystem,
    rc: RaisedCosineKernel,
    residual_tol: float = RESIDUAL_TOL,
    psd_tol: float = 1e-10,
) -> DecompositionReport:
    """Check that ``rc`` reproduces the Gram matrix on its node differences."""
    delta = gram.nodes[:, None, :] - gram.nodes[None, :, :]
    L = gram.size
    rc_gram = rc.eval(delta.reshape(L * L, gram.dim)).reshape(L, L)
    residual = float(np.max(np.abs(rc_gram - gram.matrix)))
    psd_margin = float(np.linalg.eigvalsh(0.5 * (rc_gram + rc_gram.T))[0])
    ok = residual <= residual_tol and psd_margin >= -psd_tol
    return DecompositionReport(residual=residual, psd_margin=psd_margin, ok=ok)
