"""Parameter domains, translation-invariant kernels, and discretized atoms.

A parametric dictionary maps every parameter vector ``theta`` in a
``d``-dimensional box to a unit-norm atom in some Hilbert space.  The
families handled here are *translation invariant*: the inner product of two
atoms depends only on the parameter displacement, so a single even kernel
``kappa`` with ``kappa(0) = 1`` describes the whole continuum of atoms.

All core computations downstream (Gram matrices, low-rank constructions,
error formulas) consume kernel evaluations only and never touch explicit
atom vectors.  :class:`DiscreteEmbedding` is the one place where atoms are
materialized as sample vectors; it exists for baselines, oracles and demos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, TruncationError

__all__ = [
    "ParamBox",
    "TIKernel",
    "GaussianIsotropicKernel",
    "DiscreteEmbedding",
    "as_param_array",
]


def as_param_array(x, dim: int, name: str = "theta") -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to a ``(n, dim)`` float array of parameter vectors.

    Accepts a scalar (``dim == 1`` only), a single vector of length ``dim``,
    or a stack of shape ``(n, dim)``.  Returns the batched array together
    with a flag telling whether the input denoted a single parameter, so
    callers can unwrap their result to a scalar/vector again.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise DomainError(f"{name}: scalar given but kernel dimension is {dim}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1:
            # a flat array is a batch of scalar parameters
            return arr.reshape(-1, 1), False
        if arr.shape[0] != dim:
            raise DomainError(
                f"{name}: expected a vector of length {dim}, got length {arr.shape[0]}"
            )
        return arr.reshape(1, dim), True
    if arr.ndim == 2:
        if arr.shape[1] != dim:
            raise DomainError(
                f"{name}: expected shape (n, {dim}), got {arr.shape}"
            )
        return arr, False
    raise DomainError(f"{name}: array of dimension {arr.ndim} is not a parameter stack")


@dataclass(frozen=True, eq=False)
class ParamBox:
    """Axis-aligned box of admissible parameter vectors.

    Parameters
    ----------
    lower, upper : array_like
        Per-axis bounds.  Every axis must satisfy ``lower < upper`` strictly;
        an empty or inverted box raises :class:`DomainError`.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.ndim != 1 or hi.ndim != 1 or lo.shape != hi.shape:
            raise DomainError("box bounds must be 1-D arrays of equal length")
        if lo.size == 0:
            raise DomainError("box must have at least one axis")
        if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise DomainError("box bounds must be finite")
        if not np.all(lo < hi):
            raise DomainError(f"empty box: lower={lo} upper={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, theta, atol: float = 0.0):
        """Membership test; returns a bool for a single vector, a bool array for a stack."""
        pts, single = as_param_array(theta, self.dim)
        ok = np.all((pts >= self.lower - atol) & (pts <= self.upper + atol), axis=1)
        return bool(ok[0]) if single else ok

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` uniform parameter vectors, shape ``(n, dim)``."""
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def grid(self, points_per_axis) -> np.ndarray:
        """Regular evaluation lattice over the box, shape ``(prod(points), dim)``.

        Rows are emitted in row-major order (last axis fastest), endpoints
        included.
        """
        counts = np.broadcast_to(np.asarray(points_per_axis, dtype=int), (self.dim,))
        if np.any(counts < 1):
            raise DomainError("points_per_axis must be >= 1")
        axes = [
            np.linspace(self.lower[a], self.upper[a], int(counts[a]))
            for a in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class TIKernel:
    """Translation-invariant kernel of a unit-norm atom family.

    Subclasses implement :meth:`_eval_batch` on a ``(n, dim)`` stack of
    displacements.  The kernel must be even with ``eval(0) == 1``.
    """

    dim: int

    def __init__(self, dim: int):
        if int(dim) < 1:
            raise DomainError("kernel dimension must be >= 1")
        self.dim = int(dim)

    def _eval_batch(self, deltas: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval(self, delta):
        """Kernel value at one displacement, or at a stack of displacements."""
        deltas, single = as_param_array(delta, self.dim, name="delta")
        vals = self._eval_batch(deltas)
        return float(vals[0]) if single else vals

    __call__ = eval


class GaussianIsotropicKernel(TIKernel):
    """Correlation kernel of isotropic Gaussian atoms with width ``sigma``.

    Two unit-norm Gaussian bumps whose centers differ by ``delta`` have
    inner product ``exp(-||delta||^2 / (4 sigma^2))``, in any dimension.
    """

    def __init__(self, sigma: float, dim: int = 1):
        super().__init__(dim)
        sigma = float(sigma)
        if not (sigma > 0.0) or not math.isfinite(sigma):
            raise DomainError(f"sigma must be positive and finite, got {sigma}")
        self.sigma = sigma

    def _eval_batch(self, deltas: np.ndarray) -> np.ndarray:
        sq = np.sum(deltas * deltas, axis=1)
        return np.exp(-sq / (4.0 * self.sigma**2))

    def __repr__(self) -> str:
        return f"GaussianIsotropicKernel(sigma={self.sigma}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class DiscreteEmbedding:
    """Finite sampling of the Gaussian atom family on a regular grid.

    Atoms are evaluated on a tensor-product lattice over ``[lower, upper]``,
    scaled by the square root of the cell volume so that discrete inner
    products approximate their continuous counterparts, then renormalized to
    unit Euclidean norm.  ``atom`` raises :class:`TruncationError` when more
    than ``truncation_tol`` of the atom's norm falls outside the window
    (measured against the same lattice extended to infinity).

    Attributes
    ----------
    kernel : GaussianIsotropicKernel
        Atom family being discretized.
    lower, upper : array_like
        Per-axis support of the sampling window.
    samples_per_axis : int or sequence of int
        Number of lattice points on each axis (endpoints included).
    """

    kernel: GaussianIsotropicKernel
    lower: np.ndarray
    upper: np.ndarray
    samples_per_axis: tuple = 128
    truncation_tol: float = 1e-3

    def __post_init__(self) -> None:
        if not isinstance(self.kernel, GaussianIsotropicKernel):
            raise TypeError("DiscreteEmbedding requires a GaussianIsotropicKernel")
        box = ParamBox(self.lower, self.upper)  # validates the bounds
        if box.dim != self.kernel.dim:
            raise DomainError(
                f"window dimension {box.dim} != kernel dimension {self.kernel.dim}"
            )
        counts = np.broadcast_to(
            np.asarray(self.samples_per_axis, dtype=int), (box.dim,)
        ).copy()
        if np.any(counts < 2):
            raise DomainError("samples_per_axis must be >= 2")
        object.__setattr__(self, "lower", box.lower)
        object.__setattr__(self, "upper", box.upper)
        object.__setattr__(self, "samples_per_axis", tuple(int(c) for c in counts))

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @cached_property
    def axes(self) -> tuple:
        return tuple(
            np.linspace(self.lower[a], self.upper[a], self.samples_per_axis[a])
            for a in range(self.dim)
        )

    @cached_property
    def steps(self) -> np.ndarray:
        return np.array(
            [
                (self.upper[a] - self.lower[a]) / (self.samples_per_axis[a] - 1)
                for a in range(self.dim)
            ]
        )

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    @property
    def size(self) -> int:
        """Total number of lattice points (the ambient dimension of atom vectors)."""
        return int(np.prod(self.samples_per_axis))

    def _axis_profile(self, a: int, center: float) -> np.ndarray:
        x = self.axes[a] - center
        return np.exp(-(x * x) / (2.0 * self.kernel.sigma**2))

    def _single(self, theta, name: str) -> np.ndarray:
        th, single = as_param_array(theta, self.dim, name=name)
        if not single and th.shape[0] != 1:
            raise DomainError(f"{name} must be a single parameter vector")
        return th[0]

    def truncation_deficit(self, theta) -> float:
        """Fraction of the atom's norm lost to the finite window.

        Computed per axis as the ratio between the squared-profile sum over
        the window lattice and over the same lattice extended far enough
        that all remaining terms are negligible.
        """
        t = self._single(theta, "theta")
        sig = self.kernel.sigma
        ratio = 1.0
        for a in range(self.dim):
            h = self.steps[a]
            n = self.samples_per_axis[a]
            # index range of the extended lattice: covers the window and
            # everything within 9 sigma of the atom center
            k0 = min(0, math.floor((t[a] - 9.0 * sig - self.lower[a]) / h))
            k1 = max(n - 1, math.ceil((t[a] + 9.0 * sig - self.lower[a]) / h))
            k = np.arange(k0, k1 + 1)
            x = self.lower[a] + k * h - t[a]
            full = np.exp(-(x * x) / (sig * sig))  # squared profile
            s_full = float(np.sum(full))
            s_in = float(np.sum(full[(k >= 0) & (k <= n - 1)]))
            ratio *= s_in / s_full
        return 1.0 - math.sqrt(ratio)

    def atom(self, theta) -> np.ndarray:
        """Unit-norm sample vector of the atom at ``theta``, flattened row-major."""
        t = self._single(theta, "theta")
        deficit = self.truncation_deficit(t)
        if deficit > self.truncation_tol:
            raise TruncationError(
                f"atom at theta={t.tolist()} loses {deficit:.3e} of its norm outside "
                f"the window (tolerance {self.truncation_tol:g})"
            )
        vec = self._axis_profile(0, t[0])
        for a in range(1, self.dim):
            vec = np.multiply.outer(vec, self._axis_profile(a, t[a]))
        vec = vec.ravel()
        return vec / np.linalg.norm(vec)

    def atoms(self, thetas: np.ndarray) -> np.ndarray:
        """Stack of unit-norm atoms, shape ``(n, size)``."""
        th, _ = as_param_array(thetas, self.dim)
        out = np.empty((th.shape[0], self.size))
        for i in range(th.shape[0]):
            out[i] = self.atom(th[i])
        return out

    def inner(self, theta, theta_prime) -> float:
        """Discrete inner product between two sampled atoms."""
        return float(np.dot(self.atom(theta), self.atom(theta_prime)))
