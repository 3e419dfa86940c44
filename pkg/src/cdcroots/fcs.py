"""Finitely correlated chain states generated by a unital channel.

A Stinespring isometry ``V: C^d -> C^d (x) C^k`` of the generating channel
defines transfer maps ``E_A(X) = V^*(X (x) A)V`` and the window functional
``omega(A_1 ... A_n) = tr(rho E_{A_1} o ... o E_{A_n}(1))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    CP_TOL,
    Channel,
    KrausSet,
    channel_to_choi,
    choi_to_kraus,
    random_hermitian,
)
from .errors import DimensionMismatchError, InvalidChannelError, NotAStateError

# sites carrying a non-identity observable; identity padding is just T
MAX_WINDOW = 8


@dataclass(frozen=True, eq=False)
class Isometry:
    """``V`` of shape ``(d*k, d)`` with row index ``i*k + alpha``."""

    matrix: np.ndarray
    d: int
    k: int

    def defect(self) -> float:
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(self.d)))


def stinespring_from_kraus(kraus: KrausSet, tol: float = 1e-10) -> Isometry:
    """``V|psi> = sum_a K_a|psi> (x) |a>`` so that ``V^*(X (x) 1)V = sum K^* X K``."""
    k = kraus.operators
    r, d, _ = k.shape
    v = np.transpose(k, (1, 0, 2)).reshape(d * r, d)
    iso = Isometry(v, d, r)
    if iso.defect() > tol * max(1.0, d):
        raise InvalidChannelError(f"V^*V deviates from 1 by {iso.defect():.3e}; channel is not unital")
    return iso


def stinespring(channel: Channel, tol: float = CP_TOL) -> Isometry:
    """Minimal dilation of the Heisenberg form of ``channel``."""
    return stinespring_from_kraus(choi_to_kraus(channel_to_choi(channel.heisenberg()), tol))


def apply_transfer(v: Isometry, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``E_A(X) = V^*(X (x) A)V``."""
    a = np.asarray(a)
    if a.shape != (v.k, v.k):
        raise DimensionMismatchError(f"observable must be {v.k}x{v.k}, got {a.shape}")
    return v.matrix.conj().T @ np.kron(x, a) @ v.matrix


def transfer_map(v: Isometry, a: np.ndarray) -> np.ndarray:
    """Natural (row-major ``vec``) matrix of ``E_A`` on M_d, i.e. in the matrix-unit basis."""
    a = np.asarray(a)
    if a.shape != (v.k, v.k):
        raise DimensionMismatchError(f"observable must be {v.k}x{v.k}, got {a.shape}")
    vm = v.matrix.reshape(v.d, v.k, v.d)  # [i, alpha, j]
    # E_A(X)[m, n] = sum conj(V[i,al,m]) X[i,j] A[al,be] V[j,be,n]
    t = np.einsum("iam,ab,jbn->mnij", vm.conj(), a, vm)
    return t.reshape(v.d**2, v.d**2)


@dataclass(frozen=True, eq=False)
class ChainGenerator:
    isometry: Isometry
    rho: np.ndarray

    @property
    def d(self) -> int:
        return self.isometry.d

    @property
    def k(self) -> int:
        return self.isometry.k


def chain_generator(channel: Channel, rho: np.ndarray | None = None, tol: float = 1e-9) -> ChainGenerator:
    """Generator ``(V, rho)``; ``rho`` defaults to ``1/d`` and must be invariant."""
    v = stinespring(channel)
    d = v.d
    rho = np.eye(d) / d if rho is None else np.asarray(rho, dtype=complex)
    if rho.shape != (d, d) or abs(np.trace(rho) - 1) > tol:
        raise NotAStateError("rho must be a d x d density matrix")
    # invariance: tr(rho T(X)) = tr(rho X) for all X  <=>  T^*(rho) = rho
    eye_k = np.eye(v.k)
    for idx in range(d * d):
        x = np.zeros(d * d, dtype=complex)
        x[idx] = 1
        x = x.reshape(d, d)
        if abs(np.trace(rho @ apply_transfer(v, eye_k, x)) - np.trace(rho @ x)) > tol:
            raise NotAStateError("rho is not an invariant state of the channel")
    return ChainGenerator(v, rho)


def evaluate_functional(g: ChainGenerator, observables) -> complex:
    observables = list(observables)
    eye = np.eye(g.k)
    busy = sum(not np.array_equal(a, eye) for a in observables)
    if busy > MAX_WINDOW:
        raise ValueError(f"{busy} non-identity sites exceed the cap of {MAX_WINDOW}")
    x = np.eye(g.d, dtype=complex)
    for a in reversed(list(observables)):
        x = apply_transfer(g.isometry, a, x)
    return complex(np.trace(g.rho @ x))


@dataclass
class CorrelationReport:
    gap: int
    samples: int
    max_violation: float
    order: int | None = None
    tol: float = 1e-9

    @property
    def independent(self) -> bool:
        return self.max_violation <= self.tol

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "samples": self.samples,
            "max_violation": self.max_violation,
            "order": self.order,
            "independent": self.independent,
        }


def random_observable(k: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian, operator norm 1."""
    h = random_hermitian(k, rng)
    return h / np.linalg.norm(h, 2)


def check_k_dependence(
    g: ChainGenerator,
    gap: int,
    samples: int = 200,
    tol: float = 1e-9,
    seed: int = 0,
    order: int | None = None,
) -> CorrelationReport:
    """Maximum of ``|omega(L 1^gap R) - omega(L) omega(R)|`` over random blocks.

    Each sample draws a left and a right block of one or two sites from its
    own child seed, so results do not depend on evaluation order.
    """
    if gap < 0:
        raise ValueError("gap must be non-negative")
    eye = np.eye(g.k)
    worst = 0.0
    for child in np.random.SeedSequence(seed).spawn(samples):
        rng = np.random.default_rng(child)
        left = [random_observable(g.k, rng) for _ in range(rng.integers(1, 3))]
        right = [random_observable(g.k, rng) for _ in range(rng.integers(1, 3))]
        joint = evaluate_functional(g, left + [eye] * gap + right)
        split = evaluate_functional(g, left) * evaluate_functional(g, right)
        worst = max(worst, abs(joint - split))
    return CorrelationReport(gap, samples, float(worst), order, tol)
