"""Operator bases of M_d and their Hilbert-Schmidt duals.

Vectorisation is row-major throughout: ``vec(X) = X.reshape(-1)``, so the
matrix unit ``E_kl`` maps to the standard vector with index ``k*d + l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BasisError, InvalidDimensionError

ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """A basis ``A_1..A_{d^2}`` of M_d together with its dual basis.

    The dual basis is defined by ``tr((A^j)^* A_i) = delta_ij``.

    Attributes
    ----------
    name:
        ``"gellmann"``, ``"matrix-unit"`` or a free-form tag for custom bases.
    elements, duals:
        Arrays of shape ``(d**2, d, d)``.
    """

    name: str
    elements: np.ndarray
    duals: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.elements.shape[-1]

    @property
    def columns(self) -> np.ndarray:
        """Matrix whose j-th column is ``vec(A_j)``."""
        return self.elements.reshape(self.dim**2, -1).T

    @property
    def dual_columns(self) -> np.ndarray:
        return self.duals.reshape(self.dim**2, -1).T

    @property
    def identity_first(self) -> bool:
        return np.allclose(self.elements[0], np.eye(self.dim), atol=ATOL)

    @property
    def hermitian(self) -> bool:
        herm = lambda a: np.allclose(a, a.conj().swapaxes(-1, -2), atol=ATOL)
        return herm(self.elements) and herm(self.duals)

    @property
    def traceless_tail(self) -> bool:
        tr = np.trace(self.elements[1:], axis1=1, axis2=2)
        return bool(np.all(np.abs(tr) < ATOL))

    def pairing(self) -> np.ndarray:
        """Matrix ``P[j, i] = tr((A^j)^* A_i)``; the identity for a valid basis."""
        return self.dual_columns.conj().T @ self.columns

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Expansion coefficients ``c_i = tr((A^i)^* X)`` of ``X = sum c_i A_i``."""
        return self.dual_columns.conj().T @ np.asarray(x).reshape(-1)

    def compose(self, coeffs: np.ndarray) -> np.ndarray:
        return (self.columns @ np.asarray(coeffs)).reshape(self.dim, self.dim)

    def same_as(self, other: "OperatorBasis") -> bool:
        return (
            self is other
            or (
                self.name == other.name
                and self.elements.shape == other.elements.shape
                and np.allclose(self.elements, other.elements, atol=ATOL)
            )
        )

    def check(self, require_hermitian: bool = True) -> None:
        """Raise :class:`BasisError` unless the pairing and symmetry invariants hold."""
        n = self.dim**2
        if not np.allclose(self.pairing(), np.eye(n), atol=1e-9):
            raise BasisError("dual pairing tr((A^j)* A_i) is not the identity")
        if require_hermitian and not self.hermitian:
            raise BasisError("basis or dual basis is not Hermitian")


def basis_from_elements(elements, name: str = "custom") -> OperatorBasis:
    """Build a basis from ``d**2`` matrices, computing duals by Gram inversion."""
    els = np.array(elements, dtype=complex)
    if els.ndim != 3 or els.shape[1] != els.shape[2] or els.shape[0] != els.shape[1] ** 2:
        raise BasisError(f"need d^2 matrices of size d x d, got shape {els.shape}")
    d = els.shape[1]
    cols = els.reshape(d * d, -1).T
    gram = cols.conj().T @ cols
    if np.linalg.cond(gram) > 1e12:
        raise BasisError("elements are linearly dependent")
    dual_cols = cols @ np.linalg.inv(gram)
    duals = dual_cols.T.reshape(d * d, d, d)
    return OperatorBasis(name, _frozen(els), _frozen(duals))


def gellmann_matrices(d: int) -> np.ndarray:
    """The ``d**2 - 1`` generalized Gell-Mann matrices, ``tr(g_a g_b) = 2 delta_ab``.

    Ordering: for each pair ``j < k`` the symmetric then antisymmetric
    generator, then the diagonal ones. For ``d = 2`` this is (X, Y, Z).
    """
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j, 1j
            mats += [s, a]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1
        g[l, l] = -l
        mats.append(g * np.sqrt(2 / (l * (l + 1))))
    return np.array(mats)


@lru_cache(maxsize=None)
def gellmann_basis(d: int) -> OperatorBasis:
    """Identity-first, traceless-tail Hermitian basis of M_d.

    >>> b = gellmann_basis(2)
    >>> np.allclose(b.duals[0], np.eye(2) / 2)
    True
    """
    if d < 2:
        raise InvalidDimensionError(f"d must be >= 2, got {d}")
    els = np.concatenate([np.eye(d, dtype=complex)[None], gellmann_matrices(d)])
    return basis_from_elements(els, "gellmann")


@lru_cache(maxsize=None)
def matrix_unit_basis(d: int) -> OperatorBasis:
    if d < 1:
        raise InvalidDimensionError(f"d must be >= 1, got {d}")
    els = _frozen(np.eye(d * d, dtype=complex).reshape(d * d, d, d))
    return OperatorBasis("matrix-unit", els, els)


def named_basis(name: str, d: int) -> OperatorBasis:
    if name == "gellmann":
        return gellmann_basis(d)
    if name == "matrix-unit":
        return matrix_unit_basis(d)
    raise BasisError(f"unknown basis {name!r}")


def product_basis(a: OperatorBasis, b: OperatorBasis, name: str | None = None) -> OperatorBasis:
    """Basis ``{a_i (x) b_j}`` of M_{da*db}, index ``i*db**2 + j``."""
    els = np.einsum("iab,jcd->ijacbd", a.elements, b.elements)
    duals = np.einsum("iab,jcd->ijacbd", a.duals, b.duals)
    d = a.dim * b.dim
    n = d * d
    return OperatorBasis(
        name or f"{a.name}x{b.name}",
        _frozen(els.reshape(n, d, d)),
        _frozen(duals.reshape(n, d, d)),
    )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a
