"""Finite roots of the bistochastic completely depolarizing channel.

Three constructions are provided:

* :func:`qubit_maximal_root` -- order-3 qubit roots from a rotated,
  rank-two Pauli-diagonal Bloch map;
* :func:`perturb_root` -- order ``d**2 - 1`` roots in any dimension,
  obtained by adding a nilpotent shift ``eps * sum A_i tr(A^{i+1} X)`` to
  the CDC, with the CP interval for ``eps`` read off the Choi spectrum;
* :func:`cb_lower_bound_root` -- a perturbation root that stays at
  cb-distance at least ``(d-1)/d`` from the CDC.

:func:`verify_root_order` measures the order of any candidate numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .basis import OperatorBasis, basis_from_elements, gellmann_basis, gellmann_matrices
from .channels import (
    CP_TOL,
    SCHRODINGER,
    Channel,
    bistochastic_cdc,
    from_natural,
    frobenius_distance,
    is_completely_positive,
    power,
)
from .errors import (
    BasisError,
    InvalidDimensionError,
    NotARootError,
    NotCompletelyPositiveError,
    OrderDegenerateError,
    RetryWithSmallerDeltaError,
)

ROOT_TOL = 1e-9
RANK_TOL = 1e-9
# blocks below this spectral norm count as exactly zero
ZERO_FLOOR = 1e-13
EPS_CAP = 1e6
AUTO_EPS_FRACTION = 0.9

# lambda = H mu, with lambda_0 = sum(mu)
_HADAMARD = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
)
_PAULI = np.array(
    [np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


# --- Pauli-diagonal qubit channels ------------------------------------------


@dataclass(frozen=True)
class PauliDiagonalParams:
    l1: float
    l2: float
    l3: float

    def as_array(self) -> np.ndarray:
        return np.array([1.0, self.l1, self.l2, self.l3])


@dataclass(frozen=True)
class KrausWeights:
    mu: tuple[float, float, float, float]

    @property
    def completely_positive(self) -> bool:
        return min(self.mu) >= 0

    @property
    def unital(self) -> bool:
        return abs(sum(self.mu) - 1) < 1e-12


def lambdas_to_mus(lam: PauliDiagonalParams) -> KrausWeights:
    mu = _HADAMARD @ lam.as_array() / 4
    return KrausWeights(tuple(float(m) for m in mu))


def mus_to_lambdas(mu: KrausWeights) -> PauliDiagonalParams:
    lam = _HADAMARD @ np.asarray(mu.mu, dtype=float)
    return PauliDiagonalParams(*(float(x) for x in lam[1:]))


def tetrahedron_check(lam: PauliDiagonalParams, tol: float = 1e-12) -> bool:
    l1, l2, l3 = lam.l1, lam.l2, lam.l3
    sides = (l1 + l2 + l3, l1 - l2 - l3, -l1 + l2 - l3, -l1 - l2 + l3)
    return all(s >= -1 - tol for s in sides)


def pauli_diagonal_channel(lam: PauliDiagonalParams) -> Channel:
    """``sigma_i -> lambda_i sigma_i``; the same matrix in either picture."""
    return Channel(np.diag(lam.as_array()).astype(complex), gellmann_basis(2))


def pauli_kraus_channel(mu: KrausWeights) -> Channel:
    """``X -> sum mu_i sigma_i X sigma_i`` built directly from the Pauli products."""
    natural = sum(m * np.kron(p, p.conj()) for m, p in zip(mu.mu, _PAULI))
    return from_natural(natural, gellmann_basis(2))


# --- maximal qubit roots -----------------------------------------------------


@dataclass(frozen=True)
class QubitRootSpec:
    l2: float
    l3: float
    theta: float = 0.0
    r2: np.ndarray = field(default_factory=lambda: np.eye(3))

    def to_dict(self) -> dict:
        return {
            "kind": "qubit-root",
            "l2": self.l2,
            "l3": self.l3,
            "theta": self.theta,
            "r2": np.asarray(self.r2, dtype=float).tolist(),
        }


def rotation_r1(theta: float, phi: float) -> np.ndarray:
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    return np.array(
        [
            [0.0, ct, -st],
            [sp, cp * st, cp * ct],
            [-cp, sp * st, sp * ct],
        ]
    )


def constrained_phi(theta: float, l2: float, l3: float) -> float:
    """Solve ``tan(phi) = -(l2/l3) tan(theta)`` with ``phi`` in ``(-pi/2, pi/2]``."""
    phi = math.atan2(-l2 * math.sin(theta), l3 * math.cos(theta))
    if phi > math.pi / 2:
        phi -= math.pi
    elif phi <= -math.pi / 2:
        phi += math.pi
    return phi


def bloch_trace_condition(r: np.ndarray, l2: float, l3: float, tol: float = 1e-10) -> bool:
    """``det(Lam) == 0 and tr(Lam) == 0`` for ``Lam = R[1:, 1:] * (l2, l3)``."""
    r = np.asarray(r, dtype=float)
    if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
        raise ValueError("R is not orthogonal")
    lam = r[1:, 1:] * np.array([l2, l3])
    return abs(np.linalg.det(lam)) <= tol and abs(np.trace(lam)) <= tol


def bloch_eigenvalues(theta: float, l2: float, l3: float, dps: int = 40) -> np.ndarray:
    """Eigenvalue moduli of ``R1(theta, phi) diag(0, l2, l3)`` in ``dps``-digit arithmetic.

    The map is a single nilpotent Jordan block, whose eigenvalues are only
    determined to ``eps**(1/3)`` in double precision; the angle constraint
    and the eigenproblem are therefore evaluated with mpmath.
    """
    with mpmath.workdps(dps):
        th = mpmath.mpf(theta)
        a, b = mpmath.mpf(l2), mpmath.mpf(l3)
        phi = mpmath.atan2(-a * mpmath.sin(th), b * mpmath.cos(th))
        ct, st, cp, sp = mpmath.cos(th), mpmath.sin(th), mpmath.cos(phi), mpmath.sin(phi)
        r = mpmath.matrix([[0, ct, -st], [sp, cp * st, cp * ct], [-cp, sp * st, sp * ct]])
        m = r * mpmath.diag([0, a, b])
        vals = mpmath.eig(m, left=False, right=False)
        return np.array([float(abs(v)) for v in vals])


def _bloch_channel(m: np.ndarray) -> Channel:
    d = np.zeros((4, 4), dtype=complex)
    d[0, 0] = 1
    d[1:, 1:] = m
    return Channel(d, gellmann_basis(2), SCHRODINGER)


def qubit_maximal_root(spec: QubitRootSpec) -> Channel:
    """Order-3 root ``rho(r) -> (1 + (R2^T R1 L R2 r).sigma)/2`` (Schrodinger picture)."""
    l2, l3 = float(spec.l2), float(spec.l3)
    if l2 == 0 or l3 == 0:
        raise OrderDegenerateError("L needs exactly two non-zero eigenvalues; rank one gives order <= 2")
    if abs(l2 + l3) > 1 + 1e-12 or abs(l2 - l3) > 1 + 1e-12:
        raise NotCompletelyPositiveError(f"|l2 +- l3| <= 1 violated for l2={l2}, l3={l3}")
    r2 = np.asarray(spec.r2, dtype=float)
    if not np.allclose(r2 @ r2.T, np.eye(3), atol=1e-9) or np.linalg.det(r2) < 0:
        raise ValueError("R2 must be a rotation")
    lmat = np.diag([0.0, l2, l3])
    phi0 = constrained_phi(spec.theta, l2, l3)
    target = bistochastic_cdc(2, picture=SCHRODINGER)
    for phi in (phi0, phi0 + math.pi):
        ch = _bloch_channel(r2.T @ rotation_r1(spec.theta, phi) @ lmat @ r2)
        if not is_completely_positive(ch)[0]:
            continue
        try:
            if verify_root_order(ch, target).order == 3:
                return ch
        except NotARootError:
            continue
    raise NotCompletelyPositiveError("no branch of the angle constraint gave a CP order-3 root")


# --- perturbation roots in arbitrary dimension -------------------------------


@dataclass(frozen=True, eq=False)
class PerturbRootSpec:
    d: int
    basis: OperatorBasis
    eps: float
    certified_interval: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "kind": "perturb-root",
            "d": self.d,
            "basis": self.basis.name,
            "eps": self.eps,
            "certified_interval": list(self.certified_interval),
        }


def _check_root_basis(basis: OperatorBasis) -> None:
    d = basis.dim
    if not basis.identity_first:
        raise BasisError("first basis element must be the identity")
    if not np.allclose(basis.duals[0], np.eye(d) / d, atol=1e-10):
        raise BasisError("first dual element must be 1/d")
    if not basis.hermitian:
        raise BasisError("basis and duals must be Hermitian")
    basis.check()


def shift_rho_hat(basis: OperatorBasis, weights=None) -> np.ndarray:
    """``d * sum_{i=2}^{d^2-1} w_i A_i (x) conj(A^{i+1})`` (1-based ``i``).

    The Choi matrix of the perturbation root is ``(1 + eps * rho_hat) / d**2``.
    """
    d = basis.dim
    n = d * d
    w = np.ones(n - 2) if weights is None else np.asarray(weights)
    out = np.zeros((n, n), dtype=complex)
    for j, i in enumerate(range(1, n - 1)):
        out += w[j] * np.kron(basis.elements[i], basis.duals[i + 1].conj())
    return d * out


def max_epsilon(d: int, basis: OperatorBasis | None = None, cap: float = EPS_CAP) -> tuple[float, float]:
    """Interval of ``eps`` with ``eps * rho_hat >= -1``, i.e. a positive Choi matrix."""
    basis = basis or gellmann_basis(d)
    if basis.dim != d:
        raise BasisError("basis dimension differs from d")
    vals = np.linalg.eigvalsh(shift_rho_hat(basis))
    scale = max(np.abs(vals).max(), 1e-300)
    lo = -1 / vals[-1] if vals[-1] > 1e-14 * scale else -cap
    hi = 1 / -vals[0] if vals[0] < -1e-14 * scale else cap
    return float(max(lo, -cap)), float(min(hi, cap))


def shift_map(basis: OperatorBasis, eps: float, weights=None) -> Channel:
    """Heisenberg map ``X -> 1 tr(X)/d + eps sum w_i A_i tr((A^{i+1})^* X)``."""
    d = basis.dim
    n = d * d
    w = np.ones(n - 2) if weights is None else np.asarray(weights)
    natural = np.outer(np.eye(d).reshape(-1), np.eye(d).reshape(-1)) / d
    for j, i in enumerate(range(1, n - 1)):
        natural = natural + eps * w[j] * np.outer(
            basis.elements[i].reshape(-1), basis.duals[i + 1].conj().reshape(-1)
        )
    return from_natural(natural, basis)


def perturb_root(d: int, basis: OperatorBasis | None = None, eps="auto") -> tuple[Channel, PerturbRootSpec]:
    """Root of order ``d**2 - 1`` obtained by an ``eps``-weighted nilpotent shift.

    ``eps="auto"`` takes ``0.9 * eps_hi`` of the certified interval.
    """
    if d < 2:
        raise InvalidDimensionError(f"d must be >= 2, got {d}")
    basis = basis or gellmann_basis(d)
    if basis.dim != d:
        raise BasisError("basis dimension differs from d")
    _check_root_basis(basis)
    lo, hi = max_epsilon(d, basis)
    if isinstance(eps, str):
        if eps != "auto":
            raise ValueError(f"eps must be a number or 'auto', got {eps!r}")
        eps = AUTO_EPS_FRACTION * hi
    eps = float(eps)
    if eps == 0:
        raise ValueError("eps = 0 gives the CDC itself, not a non-trivial root")
    if not lo <= eps <= hi:
        raise NotCompletelyPositiveError(f"eps={eps} outside certified interval [{lo}, {hi}]")
    ch = shift_map(basis, eps)
    ok, lam = is_completely_positive(ch)
    if not ok:
        raise NotCompletelyPositiveError(f"Choi matrix has eigenvalue {lam:.3e}")
    return ch, PerturbRootSpec(d, basis, eps, (lo, hi))


# --- order verification ------------------------------------------------------


@dataclass
class RootReport:
    order: int
    residuals: list[float]
    jordan_block_sizes: list[int] | None

    def to_dict(self) -> dict:
        return {
            "root_order": self.order,
            "residuals": list(self.residuals),
            "jordan_block_sizes": self.jordan_block_sizes,
        }


def rank_sequence(n: np.ndarray, rel_tol: float = RANK_TOL) -> list[int]:
    """``[rank(N^0), rank(N^1), ...]`` until the rank stops changing.

    Singular values of ``N^j`` count when above ``rel_tol * sigma_max(N)**j``.
    """
    size = n.shape[0]
    smax = np.linalg.norm(n, 2) if size else 0.0
    if smax <= ZERO_FLOOR:
        smax = 0.0
    ranks = [size]
    p = np.eye(size, dtype=complex)
    for j in range(1, size + 2):
        p = p @ n
        if smax == 0:
            ranks.append(0)
        else:
            sv = np.linalg.svd(p, compute_uv=False)
            ranks.append(int(np.sum(sv > rel_tol * smax**j)))
        if ranks[-1] == ranks[-2] or ranks[-1] == 0:
            break
    return ranks


def jordan_block_sizes(n: np.ndarray, rel_tol: float = RANK_TOL) -> list[int] | None:
    """Sizes of the nilpotent Jordan blocks of ``N``, largest first.

    ``None`` when ``N`` is not nilpotent (ranks stall above zero).
    """
    ranks = rank_sequence(n, rel_tol)
    if ranks[-1] != 0:
        return None
    at_least = [ranks[j - 1] - ranks[j] for j in range(1, len(ranks))] + [0]
    sizes = []
    for j in range(len(at_least) - 1, 0, -1):
        sizes += [j] * (at_least[j - 1] - at_least[j])
    return sizes


def _tail_block(ch: Channel) -> np.ndarray:
    g = ch.in_basis(gellmann_basis(ch.dim))
    return np.asarray(g.matrix)[1:, 1:]


def verify_root_order(s: Channel, target: Channel | None = None, tol: float = ROOT_TOL) -> RootReport:
    """Smallest ``k <= d**2`` with ``||S^k - target||_F <= tol``.

    ``target`` defaults to the bistochastic CDC in the basis and picture of ``s``.
    """
    d = s.dim
    if target is None:
        target = bistochastic_cdc(d, picture=s.picture).in_basis(s.basis)
    residuals = []
    p = s
    for k in range(1, d * d + 1):
        if k > 1:
            p = Channel(p.matrix @ s.matrix, s.basis, s.picture)
        residuals.append(frobenius_distance(p, target))
        if residuals[-1] <= tol:
            return RootReport(k, residuals, jordan_block_sizes(_tail_block(s)))
    raise NotARootError(f"no power k <= {d * d} reaches the target within {tol}")


def residual_ladder(s: Channel, kmax: int, target: Channel | None = None) -> list[float]:
    if target is None:
        target = bistochastic_cdc(s.dim, picture=s.picture).in_basis(s.basis)
    return [frobenius_distance(power(s, k), target) for k in range(1, kmax + 1)]


# --- cb-norm lower bound -----------------------------------------------------


def _gram_schmidt(first: list[np.ndarray], candidates) -> list[np.ndarray]:
    out = list(first)
    for c in candidates:
        v = np.array(c, dtype=complex)
        for b in out:
            v = v - np.trace(b.conj().T @ v) / np.trace(b.conj().T @ b) * b
        if np.linalg.norm(v) > 1e-9:
            out.append(v)
    return out


def cb_witness_operators(d: int) -> tuple[np.ndarray, np.ndarray]:
    """``(A_2, A_3)`` with ``||A_3|| = 1`` and eigenvalues of ``A_3`` equal to ``(-1)^i``.

    In odd ``d`` the last eigenvalue of ``A_3`` is 0 and ``A_2`` is the
    diagonal ``diag(1, ..., 1, -(d-1)) / (d-1)``; in even ``d``, ``A_2`` is
    the real off-diagonal generator on the first two levels. Both have
    operator norm 1.
    """
    a3 = np.array([(-1.0) ** i for i in range(1, d + 1)])
    if d % 2:
        a3[-1] = 0.0
        a2 = np.ones(d)
        a2[-1] = -(d - 1)
        op2 = np.diag(a2 / (d - 1)).astype(complex)
    else:
        op2 = np.zeros((d, d), dtype=complex)
        op2[0, 1] = op2[1, 0] = 1
    return op2, np.diag(a3).astype(complex)


def _cb_weights(n: int, delta: float) -> np.ndarray:
    # unscaled orthogonal basis: weight 1 on the (A_2, A^3) term, delta on the rest
    w = np.full(n - 2, delta)
    w[0] = 1.0
    return w


def _cb_choi_min(elements: list[np.ndarray], eps: float, delta: float) -> float:
    basis = basis_from_elements(elements)
    rho = shift_rho_hat(basis, _cb_weights(len(elements), delta))
    d = basis.dim
    xi = (np.eye(d * d) + eps * rho) / d**2
    return float(np.linalg.eigvalsh(xi)[0]) / np.linalg.norm(xi)


def cb_basis(d: int, delta: float, eps: float) -> OperatorBasis:
    """Orthogonal Hermitian basis ``(1, A_2, A_3, ...)`` for the cb construction.

    The order of the remaining elements decides whether the ``delta`` terms
    keep the Choi matrix positive; for ``d <= 3`` all orders are searched,
    above that a greedy order is used.
    """
    op2, op3 = cb_witness_operators(d)
    head = [np.eye(d, dtype=complex), op2, op3]
    rest = _gram_schmidt(head, gellmann_matrices(d))[3:]
    if len(rest) <= 6:
        for perm in itertools.permutations(range(len(rest))):
            els = head + [rest[p] for p in perm]
            if _cb_choi_min(els, eps, delta) >= -CP_TOL:
                return basis_from_elements(els, "cb-orthogonal")
    else:
        els = list(head)
        pool = list(rest)
        while pool:
            scores = [_cb_choi_min(els + [c] + pool[:i] + pool[i + 1 :], eps, delta) for i, c in enumerate(pool)]
            els.append(pool.pop(int(np.argmax(scores))))
        if _cb_choi_min(els, eps, delta) >= -CP_TOL:
            return basis_from_elements(els, "cb-orthogonal")
    raise RetryWithSmallerDeltaError(f"no positive Choi matrix for d={d}, delta={delta}")


@dataclass
class CbBoundResult:
    channel: Channel
    bound: float
    witness: float
    eps: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "kind": "cb-bound",
            "d": self.channel.dim,
            "eps": self.eps,
            "delta": self.delta,
            "bound": self.bound,
            "witness": self.witness,
        }


def cb_lower_bound_root(d: int, delta: float = 0.25) -> CbBoundResult:
    """Maximal root whose cb-distance to the CDC is at least ``(d-1)/d``.

    The basis elements past ``A_3`` are rescaled by ``delta**(3-i)``, which
    leaves the ``(A_2, A^3)`` term of the shift at weight ``eps`` and damps
    every later one to ``eps * delta``. With ``eps ||A_2|| = (d-1)/d`` the
    witness ``||T_eps(A_3) - T_cdc(A_3)||_inf`` equals the bound.
    """
    if d < 2:
        raise InvalidDimensionError(f"d must be >= 2, got {d}")
    if delta == 0:
        raise ValueError("delta must be non-zero")
    op2, _ = cb_witness_operators(d)
    eps = (d - 1) / d / np.linalg.norm(op2, 2)
    basis = cb_basis(d, delta, eps)
    ch = shift_map(basis, eps, _cb_weights(d * d, delta))
    ok, lam = is_completely_positive(ch)
    if not ok:
        raise RetryWithSmallerDeltaError(f"Choi eigenvalue {lam:.3e} at delta={delta}")
    a3 = basis.elements[2]
    cdc = bistochastic_cdc(d).in_basis(basis)
    witness = float(np.linalg.norm(ch(a3) - cdc(a3), 2))
    return CbBoundResult(ch, (d - 1) / d, witness, float(eps), float(delta))
