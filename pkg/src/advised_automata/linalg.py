"""Dense complex linear algebra and the halting-triple normed space.

Conventions
-----------
* Matrices are ``numpy`` complex arrays; column ``j`` is the image of basis
  state ``j`` (so ``m @ v`` applies the operator).
* A single global tolerance :data:`TOL` (1e-9) governs every equality,
  unitarity and normalization check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

TOL = 1e-9

ComplexMatrix = npt.NDArray[np.complex128]
StateVector = npt.NDArray[np.complex128]


class LinalgError(ValueError):
    """Raised on dimension mismatches or non-unitary operators."""


def as_matrix(entries, unitary: bool = False) -> ComplexMatrix:
    """Convert ``entries`` to a finite complex matrix.

    ``entries`` may be a nested list of numbers or of ``[re, im]`` pairs.
    With ``unitary=True`` the result is also checked for unitarity.
    """
    arr = np.asarray(entries)
    if arr.ndim == 3 and arr.shape[-1] == 2 and not np.iscomplexobj(arr):
        arr = arr[..., 0] + 1j * arr[..., 1]
    m = np.array(arr, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise LinalgError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinalgError("matrix has non-finite entries")
    if unitary and not is_unitary(m):
        raise LinalgError(f"matrix is not unitary (defect {unitarity_defect(m):.3g})")
    return m


def as_vector(entries, normalized: bool = False) -> StateVector:
    """Convert ``entries`` to a finite complex vector."""
    v = np.array(entries, dtype=np.complex128).reshape(-1)
    if v.size == 0:
        raise LinalgError("vector must have positive dimension")
    if not np.all(np.isfinite(v)):
        raise LinalgError("vector has non-finite entries")
    if normalized and abs(norm_sq(v) - 1.0) > TOL:
        raise LinalgError(f"vector is not normalized (|v|^2 = {norm_sq(v)})")
    return v


def basis(dim: int, index: int) -> StateVector:
    """Return the computational basis vector ``|index>`` of ``C^dim``."""
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def norm_sq(v: StateVector) -> float:
    return float(np.vdot(v, v).real)


def unitarity_defect(m: ComplexMatrix) -> float:
    """``max |(U^dagger U - I)_{ij}|``; ``inf`` for non-square input."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def is_unitary(m: ComplexMatrix, tol: float = TOL) -> bool:
    return unitarity_defect(m) <= tol


def mat_apply(m: ComplexMatrix, v: StateVector) -> StateVector:
    """Return ``m v``."""
    if m.shape[1] != v.shape[0]:
        raise LinalgError(f"dimension mismatch: {m.shape} applied to vector of dim {v.shape[0]}")
    return m @ v


def permutation_matrix(perm: Sequence[int]) -> ComplexMatrix:
    """Matrix sending basis state ``j`` to ``perm[j]``."""
    d = len(perm)
    if sorted(perm) != list(range(d)):
        raise LinalgError(f"not a permutation: {list(perm)}")
    m = np.zeros((d, d), dtype=np.complex128)
    m[list(perm), list(range(d))] = 1.0
    return m


def block_diag(*blocks: ComplexMatrix) -> ComplexMatrix:
    d = sum(b.shape[0] for b in blocks)
    out = np.zeros((d, d), dtype=np.complex128)
    k = 0
    for b in blocks:
        s = b.shape[0]
        out[k:k + s, k:k + s] = b
        k += s
    return out


def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection onto the span of a set of basis states."""

    dim: int
    indices: frozenset

    def __init__(self, dim: int, indices: Iterable[int]):
        idx = frozenset(int(i) for i in indices)
        if any(i < 0 or i >= dim for i in idx):
            raise LinalgError(f"projection index out of range for dim {dim}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "indices", idx)

    def mask(self) -> npt.NDArray[np.bool_]:
        """Read-only boolean mask of the projected coordinates (cached)."""
        m = self.__dict__.get("_mask")
        if m is None:
            m = np.zeros(self.dim, dtype=bool)
            m[list(self.indices)] = True
            m.setflags(write=False)
            self.__dict__["_mask"] = m
        return m

    def apply(self, v: StateVector) -> StateVector:
        if v.shape[0] != self.dim:
            raise LinalgError("dimension mismatch in projection")
        return np.where(self.mask(), v, 0)

    def matrix(self) -> ComplexMatrix:
        return np.diag(self.mask().astype(np.complex128))


@dataclass(frozen=True)
class Measurement:
    """The three-outcome measurement ``{P_acc, P_rej, P_non}``."""

    acc: Projection
    rej: Projection
    non: Projection

    @classmethod
    def from_sets(cls, dim: int, acc: Iterable[int], rej: Iterable[int]) -> "Measurement":
        acc, rej = frozenset(acc), frozenset(rej)
        if acc & rej:
            raise LinalgError("accepting and rejecting index sets overlap")
        non = frozenset(range(dim)) - acc - rej
        return cls(Projection(dim, acc), Projection(dim, rej), Projection(dim, non))

    @property
    def dim(self) -> int:
        return self.non.dim

    def check_partition(self) -> None:
        a, r, n = self.acc.indices, self.rej.indices, self.non.indices
        if a & r or a & n or r & n or (a | r | n) != frozenset(range(self.dim)):
            raise LinalgError("projections do not partition the basis")


def transition_op(u: ComplexMatrix, meas: Measurement, v: StateVector,
                  check: bool = True) -> tuple[StateVector, float, float]:
    """One measure-many step: ``(P_non U v, |P_acc U v|^2, |P_rej U v|^2)``."""
    if check and not is_unitary(u):
        raise LinalgError("transition operator requires a unitary matrix")
    w = mat_apply(u, v)
    acc = meas.acc.mask()
    rej = meas.rej.mask()
    p_acc = float(np.sum(np.abs(w[acc]) ** 2))
    p_rej = float(np.sum(np.abs(w[rej]) ** 2))
    residual = np.where(meas.non.mask(), w, 0)
    return residual, p_acc, p_rej


@dataclass(frozen=True)
class HaltingTriple:
    """``psi = (phi, gamma_acc, gamma_rej)`` with norm ``sqrt(|phi|^2 + |g1| + |g2|)``."""

    phi: StateVector
    gamma_acc: float = 0.0
    gamma_rej: float = 0.0

    def norm(self) -> float:
        return float(np.sqrt(norm_sq(self.phi) + abs(self.gamma_acc) + abs(self.gamma_rej)))

    def __add__(self, other: "HaltingTriple") -> "HaltingTriple":
        return HaltingTriple(self.phi + other.phi, self.gamma_acc + other.gamma_acc,
                             self.gamma_rej + other.gamma_rej)

    def __sub__(self, other: "HaltingTriple") -> "HaltingTriple":
        return HaltingTriple(self.phi - other.phi, self.gamma_acc - other.gamma_acc,
                             self.gamma_rej - other.gamma_rej)

    def distance(self, other: "HaltingTriple") -> float:
        return (self - other).norm()


def hat_T_apply(u: ComplexMatrix, meas: Measurement, psi: HaltingTriple,
                check: bool = True) -> HaltingTriple:
    """Extended transition: evolve ``phi`` and accumulate halting mass."""
    residual, pa, pr = transition_op(u, meas, psi.phi, check=check)
    return HaltingTriple(residual, psi.gamma_acc + pa, psi.gamma_rej + pr)


def hat_T_word(unitaries: Sequence[ComplexMatrix], meas: Measurement,
               psi: HaltingTriple, check: bool = True) -> HaltingTriple:
    """Apply ``hat_T`` for each operator in order (leftmost symbol first)."""
    for u in unitaries:
        psi = hat_T_apply(u, meas, psi, check=check)
    return psi


def T_word(unitaries: Sequence[ComplexMatrix], meas: Measurement, v: StateVector) -> StateVector:
    """``T_x v`` for the operator sequence of ``x``."""
    mask = meas.non.mask()
    for u in unitaries:
        v = np.where(mask, u @ v, 0)
    return v
