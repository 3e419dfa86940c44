"""Channel representations (superoperator matrix, Kraus, Choi) and conversions.

A :class:`Channel` stores the matrix ``D[i, j] = tr((A^i)^* T(A_j))`` of a
linear map ``T`` on M_d in an operator basis. ``picture`` records whether
the stored map acts on observables (Heisenberg, the default) or on states
(Schrodinger); :func:`picture_dual` switches between the two.

Internally every conversion passes through the *natural* matrix ``N``
acting on row-major vectorised operators, ``vec(T(X)) = N vec(X)``; it
coincides with ``D`` in the matrix-unit basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import OperatorBasis, gellmann_basis, named_basis
from .errors import (
    DimensionMismatchError,
    NotAStateError,
    NotCompletelyPositiveError,
)

HEISENBERG = "heisenberg"
SCHRODINGER = "schrodinger"
PICTURES = (HEISENBERG, SCHRODINGER)

CP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Channel:
    """Superoperator matrix of a map ``M_d -> M_d`` in a declared basis."""

    matrix: np.ndarray
    basis: OperatorBasis
    picture: str = HEISENBERG

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.basis.dim**2
        if m.shape != (n, n):
            raise DimensionMismatchError(f"matrix shape {m.shape} does not fit basis of M_{self.basis.dim}")
        if not np.all(np.isfinite(m)):
            raise ValueError("superoperator matrix has non-finite entries")
        if self.picture not in PICTURES:
            raise ValueError(f"picture must be one of {PICTURES}, got {self.picture!r}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.basis.dim

    d_in = d_out = dim

    @property
    def natural(self) -> np.ndarray:
        """Matrix of the stored map on row-major ``vec``."""
        return self.basis.columns @ self.matrix @ self.basis.dual_columns.conj().T

    def __call__(self, x: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.natural @ np.asarray(x, dtype=complex).reshape(-1)).reshape(d, d)

    def in_basis(self, basis: OperatorBasis | str) -> "Channel":
        if isinstance(basis, str):
            basis = named_basis(basis, self.dim)
        if basis.dim != self.dim:
            raise DimensionMismatchError("basis dimension differs from channel dimension")
        return from_natural(self.natural, basis, self.picture)

    def heisenberg(self) -> "Channel":
        return self if self.picture == HEISENBERG else picture_dual(self)

    def schrodinger(self) -> "Channel":
        return self if self.picture == SCHRODINGER else picture_dual(self)


def from_natural(natural: np.ndarray, basis: OperatorBasis, picture: str = HEISENBERG) -> Channel:
    return Channel(basis.dual_columns.conj().T @ natural @ basis.columns, basis, picture)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Operators ``K_a`` with ``T(X) = sum_a K_a^* X K_a`` (Heisenberg form)."""

    operators: np.ndarray

    def __post_init__(self):
        ops = np.array(self.operators, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionMismatchError(f"Kraus operators must be square, got shape {ops.shape}")
        ops.flags.writeable = False
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def __len__(self) -> int:
        return self.operators.shape[0]

    def normalization(self, atol: float = 1e-9) -> dict:
        """Which Kraus normalisations hold.

        ``sum K K^* = 1`` is the condition written next to the Kraus form;
        ``sum K^* K = 1`` is unitality of the Heisenberg map. Both hold for
        bistochastic channels.
        """
        eye = np.eye(self.dim)
        k = self.operators
        return {
            "sum_KKdag": bool(np.allclose(np.einsum("aij,akj->ik", k, k.conj()), eye, atol=atol)),
            "sum_KdagK": bool(np.allclose(np.einsum("aji,ajk->ik", k.conj(), k), eye, atol=atol)),
        }


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    """``xi = (T (x) id)(|Omega><Omega|)`` of the stored map.

    ``kind`` is ``"operator"`` for a Heisenberg map and ``"state"`` for a
    Schrodinger map (unit trace when the channel is trace preserving).
    """

    matrix: np.ndarray
    kind: str = "operator"

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    @property
    def picture(self) -> str:
        return HEISENBERG if self.kind == "operator" else SCHRODINGER


def identity_channel(d: int, basis: OperatorBasis | None = None, picture: str = HEISENBERG) -> Channel:
    basis = basis or gellmann_basis(d)
    return Channel(np.eye(d * d), basis, picture)


def kraus_to_channel(kraus: KrausSet, basis: OperatorBasis | None = None) -> Channel:
    """Heisenberg channel ``T(X) = sum K^* X K`` in ``basis`` (Gell-Mann by default)."""
    basis = basis or gellmann_basis(kraus.dim)
    if basis.dim != kraus.dim:
        raise DimensionMismatchError(f"Kraus operators act on C^{kraus.dim}, basis on C^{basis.dim}")
    k = kraus.operators
    # vec(K^* X K) = (K^* (x) K^T) vec(X) for row-major vec
    natural = sum(np.kron(ka.conj().T, ka.T) for ka in k)
    return from_natural(natural, basis, HEISENBERG)


def channel_to_choi(channel: Channel) -> ChoiOperator:
    d = channel.dim
    n = channel.natural.reshape(d, d, d, d)  # [n, m, k, l] = <n|T(E_kl)|m>
    xi = n.transpose(0, 2, 1, 3).reshape(d * d, d * d) / d
    kind = "operator" if channel.picture == HEISENBERG else "state"
    return ChoiOperator(xi, kind)


def choi_to_channel(choi: ChoiOperator, basis: OperatorBasis | None = None) -> Channel:
    d = choi.dim
    basis = basis or gellmann_basis(d)
    xi = np.asarray(choi.matrix).reshape(d, d, d, d)  # [n, k, m, l]
    natural = d * xi.transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return from_natural(natural, basis, choi.picture)


def choi_to_kraus(choi: ChoiOperator, tol: float = CP_TOL) -> KrausSet:
    """Minimal Kraus set from the eigendecomposition of the Choi matrix.

    Eigenvalues above ``tol * ||xi||_F`` count towards the Kraus rank;
    one below ``-tol * ||xi||_F`` raises :class:`NotCompletelyPositiveError`.
    """
    xi = np.asarray(choi.matrix)
    xi = (xi + xi.conj().T) / 2
    d = choi.dim
    vals, vecs = np.linalg.eigh(xi)
    scale = max(np.linalg.norm(xi), 1e-300)
    if vals[0] < -tol * scale:
        raise NotCompletelyPositiveError(f"Choi matrix has eigenvalue {vals[0]:.3e}")
    keep = vals > tol * scale
    # stored map Phi(X) = sum L X L^*, with L = sqrt(d * lam) unvec(v)
    ls = np.sqrt(d * vals[keep])[:, None, None] * vecs[:, keep].T.reshape(-1, d, d)
    ls = ls[::-1]
    ops = ls.conj().transpose(0, 2, 1) if choi.kind == "operator" else ls
    return KrausSet(ops)


def kraus_rank(channel: Channel, tol: float = CP_TOL) -> int:
    return len(choi_to_kraus(channel_to_choi(channel), tol))


def min_choi_eigenvalue(channel: Channel) -> float:
    xi = channel_to_choi(channel).matrix
    return float(np.linalg.eigvalsh((xi + xi.conj().T) / 2)[0])


def is_completely_positive(channel: Channel, tol: float = CP_TOL) -> tuple[bool, float]:
    """``(lambda_min(xi) >= -tol * ||xi||_F, lambda_min(xi))``."""
    xi = channel_to_choi(channel).matrix
    lam = float(np.linalg.eigvalsh((xi + xi.conj().T) / 2)[0])
    return bool(lam >= -tol * np.linalg.norm(xi)), lam


def structural_predicates(channel: Channel, tol: float = CP_TOL) -> dict:
    """Normalisation checks on the Heisenberg form ``T`` of the channel.

    ``unital``: ``T(1) = 1`` (equivalently, the Schrodinger map preserves trace).
    ``trace_preserving_dual``: ``tr T(X) = tr X``, i.e. ``sum K K^* = 1`` for
    ``T(X) = sum K^* X K``, the normalisation written with the Kraus form.
    """
    t = channel.heisenberg()
    d = t.dim
    eye = np.eye(d)
    unital = np.allclose(t(eye), eye, atol=tol)
    # tr T(X) = tr X for all X  <=>  T^*(1) = 1
    trace_ok = np.allclose(picture_dual(t)(eye), eye, atol=tol)
    return {"unital": bool(unital), "trace_preserving_dual": bool(trace_ok)}


def check_state(sigma: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    s = np.asarray(sigma, dtype=complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NotAStateError("state must be a square matrix")
    if not np.allclose(s, s.conj().T, atol=tol):
        raise NotAStateError("state is not Hermitian")
    if abs(np.trace(s) - 1) > tol:
        raise NotAStateError(f"state has trace {np.trace(s).real:.6g}")
    if np.linalg.eigvalsh((s + s.conj().T) / 2)[0] < -tol:
        raise NotAStateError("state is not positive")
    return s


def cdc_channel(sigma: np.ndarray, basis: OperatorBasis | None = None) -> Channel:
    """Heisenberg CDC ``T_sigma(A) = tr(sigma A) 1``."""
    s = check_state(sigma)
    d = s.shape[0]
    basis = basis or gellmann_basis(d)
    # vec(tr(sigma A) 1) = vec(1) vec(sigma^T)^T vec(A)
    natural = np.outer(np.eye(d).reshape(-1), s.T.reshape(-1))
    return from_natural(natural, basis, HEISENBERG)


def bistochastic_cdc(d: int, basis: OperatorBasis | None = None, picture: str = HEISENBERG) -> Channel:
    ch = cdc_channel(np.eye(d) / d, basis)
    return ch if picture == HEISENBERG else Channel(ch.matrix, ch.basis, picture)


def _check_compatible(s: Channel, t: Channel) -> None:
    if s.dim != t.dim:
        raise DimensionMismatchError(f"dimensions differ: {s.dim} vs {t.dim}")
    if not s.basis.same_as(t.basis):
        raise DimensionMismatchError(f"bases differ: {s.basis.name} vs {t.basis.name}")
    if s.picture != t.picture:
        raise DimensionMismatchError(f"pictures differ: {s.picture} vs {t.picture}")


def compose(s: Channel, t: Channel) -> Channel:
    """``t`` first, then ``s``, as maps in the stored picture."""
    _check_compatible(s, t)
    return Channel(s.matrix @ t.matrix, s.basis, s.picture)


def power(t: Channel, k: int) -> Channel:
    if k < 0:
        raise ValueError("power must be non-negative")
    return Channel(np.linalg.matrix_power(t.matrix, k), t.basis, t.picture)


def picture_dual(t: Channel) -> Channel:
    """The dual map ``T^*`` with ``tr(T^*(rho) A) = tr(rho T(A))``, opposite picture."""
    d = t.dim
    n = t.natural.reshape(d, d, d, d)
    # <n|T*(E_kl)|m> = <l|T(E_mn)|k>
    dual = n.transpose(3, 2, 1, 0).reshape(d * d, d * d)
    other = SCHRODINGER if t.picture == HEISENBERG else HEISENBERG
    return from_natural(dual, t.basis, other)


def frobenius_distance(s: Channel, t: Channel) -> float:
    _check_compatible(s, t)
    return float(np.linalg.norm(s.matrix - t.matrix))


def unitary_channel(u: np.ndarray, basis: OperatorBasis | None = None) -> Channel:
    """Heisenberg conjugation ``X -> U^* X U``."""
    return kraus_to_channel(KrausSet(np.asarray(u)[None]), basis)


def random_kraus_set(d: int, rank: int, rng: np.random.Generator) -> KrausSet:
    """Kraus set with ``sum K^* K = 1`` cut from a Haar-like random isometry."""
    g = rng.normal(size=(rank * d, d)) + 1j * rng.normal(size=(rank * d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausSet(q.reshape(rank, d, d))


def random_channel(d: int, rng: np.random.Generator, rank: int | None = None, basis=None) -> Channel:
    return kraus_to_channel(random_kraus_set(d, rank or d, rng), basis)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2
