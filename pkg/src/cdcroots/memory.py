"""Memory channels ``T: M (x) A -> B (x) M`` and strict forgetfulness.

Matrix convention (Schrodinger picture, Gell-Mann bases with identity first)::

    D[(i, j), (k, l)] = tr((B^j (x) M^i)^* T(M_k (x) A_l))

with row index ``i * dB**2 + j`` and column index ``k * dA**2 + l``. The
memory branch for a fixed input state ``sigma`` is the ``dM**2`` square
matrix ``D_sigma = dB * sum_r tr(A^r sigma) X_r`` where
``X_r[k, l] = D[(k, 1), (l, r)]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .basis import OperatorBasis, gellmann_basis
from .channels import CP_TOL, check_state
from .errors import (
    BasisError,
    ConstructionFailedError,
    DimensionMismatchError,
    NotCompletelyPositiveError,
    SizeCapExceededError,
)

KERNEL_TOL = 1e-9
BISECTION_STEPS = 20
MAX_SYSTEM_QUBITS = 8


def _out_columns(bm: OperatorBasis, bb: OperatorBasis, duals: bool = False) -> np.ndarray:
    """Columns ``vec(B_j (x) M_i)`` indexed ``i * dB**2 + j``."""
    m = bm.duals if duals else bm.elements
    b = bb.duals if duals else bb.elements
    els = np.einsum("jab,icd->ijacbd", b, m)
    d = bm.dim * bb.dim
    return els.reshape(-1, d * d).T


def _in_columns(bm: OperatorBasis, ba: OperatorBasis, duals: bool = False) -> np.ndarray:
    """Columns ``vec(M_k (x) A_l)`` indexed ``k * dA**2 + l``."""
    m = bm.duals if duals else bm.elements
    a = ba.duals if duals else ba.elements
    els = np.einsum("kab,lcd->klacbd", m, a)
    d = bm.dim * ba.dim
    return els.reshape(-1, d * d).T


@dataclass(frozen=True, eq=False)
class MemoryChannel:
    dM: int
    dA: int
    dB: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        shape = ((self.dM * self.dB) ** 2, (self.dM * self.dA) ** 2)
        if m.shape != shape:
            raise DimensionMismatchError(f"matrix shape {m.shape}, expected {shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def bases(self) -> tuple[OperatorBasis, OperatorBasis, OperatorBasis]:
        return gellmann_basis(self.dM), gellmann_basis(self.dA), gellmann_basis(self.dB)

    @property
    def blocks(self) -> np.ndarray:
        """``D`` as an array ``[i, j, k, l]``."""
        return self.matrix.reshape(self.dM**2, self.dB**2, self.dM**2, self.dA**2)

    @property
    def natural(self) -> np.ndarray:
        bm, ba, bb = self.bases
        out = _out_columns(bm, bb)
        in_dual = _in_columns(bm, ba, duals=True)
        return out @ self.matrix @ in_dual.conj().T

    def __call__(self, x: np.ndarray) -> np.ndarray:
        d_out = self.dB * self.dM
        return (self.natural @ np.asarray(x, dtype=complex).reshape(-1)).reshape(d_out, d_out)

    @classmethod
    def from_natural(cls, natural: np.ndarray, dM: int, dA: int, dB: int) -> "MemoryChannel":
        bm, ba, bb = gellmann_basis(dM), gellmann_basis(dA), gellmann_basis(dB)
        out_dual = _out_columns(bm, bb, duals=True)
        d = out_dual.conj().T @ natural @ _in_columns(bm, ba)
        return cls(dM, dA, dB, d)


def composite_choi(t: MemoryChannel) -> np.ndarray:
    """Normalised Choi matrix ``sum_ab T(E_ab) (x) E_ab / (dM dA)``."""
    d_in, d_out = t.dM * t.dA, t.dB * t.dM
    n = t.natural.reshape(d_out, d_out, d_in, d_in)  # [n, m, a, b]
    return n.transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in) / d_in


def is_completely_positive(t: MemoryChannel, tol: float = CP_TOL) -> tuple[bool, float]:
    xi = composite_choi(t)
    lam = float(np.linalg.eigvalsh((xi + xi.conj().T) / 2)[0])
    return bool(lam >= -tol * np.linalg.norm(xi)), lam


def is_trace_preserving(t: MemoryChannel, tol: float = 1e-9) -> bool:
    d_in, d_out = t.dM * t.dA, t.dB * t.dM
    n = t.natural.reshape(d_out, d_out, d_in * d_in)
    return bool(np.allclose(np.einsum("nnk->k", n), np.eye(d_in).reshape(-1), atol=tol))


# --- memory branch -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MemoryBranchFamily:
    """Blocks ``X_l`` (``l = 1..dA**2``) read off the ``B^1 = 1/dB`` output row."""

    blocks: np.ndarray  # (dA**2, dM**2, dM**2)
    dA: int
    dB: int

    @property
    def reduced(self) -> np.ndarray:
        """Blocks with first row and column removed."""
        return self.blocks[:, 1:, 1:]

    @property
    def dM(self) -> int:
        return int(round(np.sqrt(self.blocks.shape[1])))


def extract_branch(t: MemoryChannel) -> MemoryBranchFamily:
    for b in t.bases:
        if not (b.identity_first and b.traceless_tail):
            raise BasisError("memory-channel bases must be identity-first with traceless tails")
    x = t.blocks[:, 0, :, :]  # [k, l_mem, r]
    return MemoryBranchFamily(np.ascontiguousarray(x.transpose(2, 0, 1)), t.dA, t.dB)


def input_coefficients(sigma: np.ndarray, dA: int) -> np.ndarray:
    """``alpha_r = tr((A^r)^* sigma)`` in the Gell-Mann basis of the input system."""
    return gellmann_basis(dA).coefficients(sigma)


def parameterized_branch(f: MemoryBranchFamily, sigma: np.ndarray) -> np.ndarray:
    """``D_sigma = (dB/dA) X_1 + dB sum_{r>=2} alpha_r(sigma) X_r``."""
    s = check_state(sigma)
    if s.shape != (f.dA, f.dA):
        raise DimensionMismatchError(f"input state must be {f.dA}x{f.dA}")
    alpha = input_coefficients(s, f.dA)
    alpha[0] = 1 / f.dA
    return f.dB * np.tensordot(alpha, f.blocks, axes=1)


def branch_concatenation(f: MemoryBranchFamily, sigmas) -> np.ndarray:
    """``D_{sigma_n} ... D_{sigma_1}``; ``sigmas[0]`` acts first."""
    out = np.eye(f.blocks.shape[1], dtype=complex)
    for s in sigmas:
        out = parameterized_branch(f, s) @ out
    return out


def direct_branch(t: MemoryChannel, sigma: np.ndarray) -> np.ndarray:
    """``<k|D_sigma|l> = tr((M^k)^* tr_B T(M_l (x) sigma))`` evaluated on the full channel."""
    bm = gellmann_basis(t.dM)
    out = np.zeros((t.dM**2, t.dM**2), dtype=complex)
    for l in range(t.dM**2):
        y = t(np.kron(bm.elements[l], sigma))
        red = np.trace(y.reshape(t.dB, t.dM, t.dB, t.dM), axis1=0, axis2=2)
        out[:, l] = bm.coefficients(red)
    return out


# --- forgetfulness decision --------------------------------------------------


@dataclass
class ForgetfulnessVerdict:
    strictly_forgetful: bool
    depth: int | None
    triangularizing_basis: np.ndarray | None = None
    witness_word: list[int] | None = None
    witness_states: list[np.ndarray] | None = field(default=None, repr=False)
    flag_dimensions: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        def cplx(a):
            return None if a is None else np.stack([a.real, a.imag], axis=-1).tolist()

        return {
            "strictly_forgetful": self.strictly_forgetful,
            "depth": self.depth,
            "flag_dimensions": self.flag_dimensions,
            "triangularizing_basis": cplx(self.triangularizing_basis),
            "witness_word": self.witness_word,
            "witness_states": None if self.witness_states is None else [cplx(s) for s in self.witness_states],
        }


def _null_space(m: np.ndarray, thresh: float) -> np.ndarray:
    _, sv, vh = np.linalg.svd(m)
    rank = int(np.sum(sv > thresh))
    return vh[rank:].conj().T


def common_kernel_flag(generators, tol: float = KERNEL_TOL) -> tuple[list[np.ndarray], bool]:
    """Chain ``V_1 < V_2 < ...`` with ``G V_j <= V_{j-1}`` for every generator.

    ``V_j`` is the space annihilated by all words of length ``j``. Returns
    the orthonormal bases of the chain and whether it reaches the whole
    space, i.e. whether the generated algebra is nilpotent.
    """
    gens = np.asarray(generators, dtype=complex)
    n = gens.shape[1]
    scale = max(max(np.linalg.norm(g, 2) for g in gens), 1e-300)
    q = np.zeros((n, 0), dtype=complex)
    flag = []
    while q.shape[1] < n:
        proj = np.eye(n) - q @ q.conj().T
        stacked = np.concatenate([proj @ g for g in gens])
        nxt = _null_space(stacked, tol * scale)
        if nxt.shape[1] <= q.shape[1]:
            return flag, False
        q = nxt
        flag.append(q)
    return flag, True


def _adapted_basis(flag: list[np.ndarray]) -> np.ndarray:
    cols = np.zeros((flag[-1].shape[0], 0), dtype=complex)
    for v in flag:
        resid = v - cols @ (cols.conj().T @ v)
        u, sv, _ = np.linalg.svd(resid, full_matrices=False)
        cols = np.concatenate([cols, u[:, : v.shape[1] - cols.shape[1]]], axis=1)
    return cols


def find_nonnil_word(generators, max_len: int | None = None, tol: float = KERNEL_TOL, max_words: int = 50000):
    """Shortest word ``G_{l_1} ... G_{l_k}`` with ``tr(W^m) != 0`` for some ``m <= n``.

    Returns 0-based generator indices, or ``None`` if none is found.
    """
    gens = np.asarray(generators, dtype=complex)
    n = gens.shape[1]
    scale = max(max(np.linalg.norm(g, 2) for g in gens), 1e-300)
    max_len = max_len or n * n
    seen = 0
    for length in range(1, max_len + 1):
        for word in itertools.product(range(len(gens)), repeat=length):
            seen += 1
            if seen > max_words:
                return None
            w = np.eye(n, dtype=complex)
            for l in word:
                w = w @ gens[l]
            p = np.eye(n, dtype=complex)
            for m in range(1, n + 1):
                p = p @ w
                if abs(np.trace(p)) > tol * (scale ** (length * m)) * n:
                    return list(word)
    return None


def _witness_states(f: MemoryBranchFamily, word: list[int], tol: float) -> list[np.ndarray] | None:
    """Input states realising the word: top/bottom eigenprojectors of each ``A_l``."""
    ba = gellmann_basis(f.dA)
    options = []
    for l in word:
        if l == 0:
            options.append([np.eye(f.dA) / f.dA])
            continue
        _, vecs = np.linalg.eigh(ba.elements[l])
        options.append([np.outer(v, v.conj()) for v in (vecs[:, -1], vecs[:, 0])])
    for choice in itertools.product(*options):
        # word G_{l1}...G_{lk}: the last letter acts first
        seq = list(reversed(choice))
        tail = branch_concatenation(f, seq)[1:, 1:]
        if not _is_nilpotent(tail, tol):
            return seq
    return None


def _is_nilpotent(p: np.ndarray, tol: float) -> bool:
    """``tr(P^m) = 0`` for ``m = 1..n`` (relative to ``||P||^m``)."""
    n = p.shape[0]
    scale = np.linalg.norm(p, 2)
    if scale == 0:
        return True
    q = np.eye(n, dtype=complex)
    for m in range(1, n + 1):
        q = q @ (p / scale)
        if abs(np.trace(q)) > tol * n:
            return False
    return True


def forgetfulness_from_generators(generators, tol: float = KERNEL_TOL) -> ForgetfulnessVerdict:
    """Nilpotency of the algebra generated by the reduced branch blocks."""
    gens = np.asarray(generators, dtype=complex)
    flag, nilpotent = common_kernel_flag(gens, tol)
    dims = [v.shape[1] for v in flag]
    if nilpotent:
        return ForgetfulnessVerdict(True, len(flag), _adapted_basis(flag), flag_dimensions=dims)
    return ForgetfulnessVerdict(False, None, None, find_nonnil_word(gens, tol=tol), flag_dimensions=dims)


def is_strictly_forgetful(t: MemoryChannel | MemoryBranchFamily, tol: float = KERNEL_TOL) -> ForgetfulnessVerdict:
    """Decide strict forgetfulness and the memory depth.

    The witness word uses 1-based generator labels ``l`` (as in ``X_{1,l}``);
    ``witness_states`` lists input states in application order whose
    repetition never reaches a CDC.
    """
    f = t if isinstance(t, MemoryBranchFamily) else extract_branch(t)
    verdict = forgetfulness_from_generators(f.reduced, tol)
    if verdict.witness_word is not None:
        verdict.witness_states = _witness_states(f, verdict.witness_word, tol)
        verdict.witness_word = [l + 1 for l in verdict.witness_word]
    return verdict


def words_vanish(generators, length: int, tol: float = KERNEL_TOL) -> bool:
    """Exhaustive check that every product of ``length`` generators is zero."""
    gens = np.asarray(generators, dtype=complex)
    scale = max(max(np.linalg.norm(g, 2) for g in gens), 1e-300)
    for word in itertools.product(range(len(gens)), repeat=length):
        w = np.eye(gens.shape[1], dtype=complex)
        for l in word:
            w = w @ gens[l]
        if np.linalg.norm(w, 2) > tol * scale**length:
            return False
    return True


def nilpotency_index_by_words(generators, max_len: int, tol: float = KERNEL_TOL) -> int | None:
    for length in range(1, max_len + 1):
        if words_vanish(generators, length, tol):
            return length
    return None


# --- constructions -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ForgetfulSpec:
    """Blocks ``J_l`` (strictly upper triangular, ``dM**2 - 1`` square) and vector ``v``.

    ``eta=None`` lets :func:`construct_strictly_forgetful` bisect for the
    largest CP scale in ``(0, eta_max]``.
    """

    dM: int
    dA: int
    dB: int
    J: np.ndarray
    v: np.ndarray
    eta: float | None = None
    eta_max: float = 1.0

    def to_dict(self) -> dict:
        j = np.asarray(self.J)
        return {
            "kind": "forgetful",
            "dM": self.dM,
            "dA": self.dA,
            "dB": self.dB,
            "J": np.stack([j.real, j.imag], axis=-1).tolist(),
            "v": np.asarray(self.v, dtype=float).tolist(),
            "eta": self.eta,
            "eta_max": self.eta_max,
        }


def jordan_tail_spec(dM: int = 2, dA: int = 2, dB: int = 2, eta: float | None = None) -> ForgetfulSpec:
    """Every ``J_l`` equal to the single maximal nilpotent Jordan block, ``v = 0``."""
    n = dM * dM - 1
    jb = np.eye(n, k=1)
    return ForgetfulSpec(dM, dA, dB, np.array([jb] * dA**2), np.zeros(n), eta)


def _forgetful_matrix(spec: ForgetfulSpec, eta: float) -> np.ndarray:
    dM, dA, dB = spec.dM, spec.dA, spec.dB
    d4 = np.zeros((dM**2, dB**2, dM**2, dA**2), dtype=complex)
    ratio = dA / dB
    for l in range(dA**2):
        x = np.zeros((dM**2, dM**2), dtype=complex)
        if l == 0:
            x[0, 0] = ratio
            x[1:, 0] = ratio * eta * np.asarray(spec.v)
        x[1:, 1:] = eta * np.asarray(spec.J[l])
        d4[:, 0, :, l] = x
    return d4.reshape((dM * dB) ** 2, (dM * dA) ** 2)


def _bisect_scale(build, hi: float, steps: int = BISECTION_STEPS) -> tuple[float, list[float]]:
    """Largest CP scale in ``(0, hi]`` by bisection on ``lambda_min`` of the Choi matrix."""
    trace = []
    ok, lam = is_completely_positive(build(hi))
    trace.append(lam)
    if ok:
        return hi, trace
    lo = 0.0
    for _ in range(steps):
        mid = (lo + hi) / 2
        ok, lam = is_completely_positive(build(mid))
        trace.append(lam)
        lo, hi = (mid, hi) if ok else (lo, mid)
    return lo, trace


def construct_strictly_forgetful(spec: ForgetfulSpec) -> tuple[MemoryChannel, float]:
    """Memory channel whose branch blocks follow the triangular block form.

    All rows not fixed by the branch blocks are the bistochastic-CDC
    baseline. Returns the channel and the scale ``eta`` used.
    """
    n = spec.dM**2 - 1
    j = np.asarray(spec.J, dtype=complex)
    if j.shape != (spec.dA**2, n, n):
        raise DimensionMismatchError(f"J must have shape {(spec.dA**2, n, n)}, got {j.shape}")
    if np.any(np.abs(np.tril(j)) > 1e-12):
        raise ValueError("every J_l must be strictly upper triangular")
    if np.asarray(spec.v).shape != (n,):
        raise DimensionMismatchError(f"v must have length {n}")
    if not forgetfulness_from_generators(j).strictly_forgetful:
        raise ConstructionFailedError("J_l do not generate a nilpotent algebra")

    def build(eta):
        return MemoryChannel(spec.dM, spec.dA, spec.dB, _forgetful_matrix(spec, eta))

    if spec.eta is not None:
        ch = build(spec.eta)
        ok, lam = is_completely_positive(ch)
        if not ok:
            raise NotCompletelyPositiveError(f"eta={spec.eta} gives Choi eigenvalue {lam:.3e}")
        return ch, float(spec.eta)
    eta, trace = _bisect_scale(build, spec.eta_max)
    if eta <= 0:
        raise ConstructionFailedError(f"no CP scale found; lambda_min trace {trace}")
    return build(eta), float(eta)


def counterexample_blocks(a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x2 = np.array([[0, 0, 0], [-a, 0, 0], [0, a, 0]], dtype=float)
    x3 = np.array([[0, b, 0], [0, 0, b], [0, 0, 0]], dtype=float)
    return x2, x3


def _counterexample_matrix(a: float, b: float) -> np.ndarray:
    d4 = np.zeros((4, 4, 4, 4), dtype=complex)
    d4[0, 0, 0, 0] = 1
    x2, x3 = counterexample_blocks(a, b)
    d4[1:, 0, 1:, 1] = x2
    d4[1:, 0, 1:, 2] = x3
    return d4.reshape(16, 16)


def counterexample_scale(a: float, b: float) -> float:
    """Largest ``t`` in ``(0, 1]`` with ``(t a, t b)`` completely positive."""
    t, _ = _bisect_scale(lambda s: MemoryChannel(2, 2, 2, _counterexample_matrix(s * a, s * b)), 1.0)
    return t


def counterexample_channel(a: float, b: float) -> MemoryChannel:
    """Qubit memory channel whose branch is a root for every fixed input but never forgets."""
    ch = MemoryChannel(2, 2, 2, _counterexample_matrix(a, b))
    ok, lam = is_completely_positive(ch)
    if not ok:
        t = counterexample_scale(a, b)
        raise NotCompletelyPositiveError(
            f"(a, b) = ({a}, {b}) is not CP (lambda_min {lam:.3e}); largest CP scale is {t:.6g}"
        )
    return ch


def pauli_eigenstate(axis: str) -> np.ndarray:
    vec = {
        "x": np.array([1, 1]) / np.sqrt(2),
        "y": np.array([1, 1j]) / np.sqrt(2),
        "z": np.array([1, 0]),
    }[axis]
    return np.outer(vec, vec.conj())


# --- full concatenation ------------------------------------------------------


def concatenate(t: MemoryChannel, rho: np.ndarray, n: int, trace_outputs: bool = True) -> np.ndarray:
    """Apply the ``n``-fold concatenation to ``rho`` on ``M (x) A^n``.

    The memory is passed along; the outputs ``B_1..B_n`` are kept in order
    in front of it and traced out at the end when ``trace_outputs``.
    """
    dM, dA, dB = t.dM, t.dA, t.dB
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dM * dA**n,) * 2:
        raise DimensionMismatchError(f"input must act on M (x) A^{n}")
    # natural map as tensor [b, mo, b', mo', mi, a, mi', a']
    tn = t.natural.reshape(dB, dM, dB, dM, dM, dA, dM, dA)
    p = 1
    for step in range(n):
        q = dA ** (n - step - 1)
        r = rho.reshape(p, dM, dA, q, p, dM, dA, q)
        r = np.einsum("bocdmaMA,xmaqyMAz->xboqycdz", tn, r)
        p *= dB
        rho = r.reshape(p * dM * q, p * dM * q)
    if not trace_outputs:
        return rho
    return np.trace(rho.reshape(p, dM, p, dM), axis1=0, axis2=2)


def _check_size(t: MemoryChannel, n: int) -> None:
    if n * np.log2(t.dA) > MAX_SYSTEM_QUBITS + 1e-9:
        raise SizeCapExceededError(f"n * log2(dA) = {n * np.log2(t.dA):.2f} exceeds {MAX_SYSTEM_QUBITS}")


def distinguishability(t: MemoryChannel, n: int, m1: np.ndarray, m2: np.ndarray, system: np.ndarray) -> float:
    """``|| tr_B T_n((m1 - m2) (x) system) ||_1``."""
    if n == 0:
        return float(np.abs(np.linalg.eigvalsh(m1 - m2)).sum())
    out = concatenate(t, np.kron(m1 - m2, system), n)
    return float(np.abs(np.linalg.eigvalsh((out + out.conj().T) / 2)).sum())


def _random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def entangled_input_check(
    t: MemoryChannel,
    n: int,
    samples: int = 100,
    seed: int = 0,
    extra_inputs=(),
) -> float:
    """Largest memory distinguishability after ``n`` steps over sampled inputs.

    Each sample draws two random pure memory states and a random pure (hence
    generically entangled) state of ``A^n`` from its own child seed.
    ``extra_inputs`` adds explicit ``(m1, m2, system)`` triples.
    """
    _check_size(t, n)
    worst = 0.0
    for child in np.random.SeedSequence(seed).spawn(samples):
        rng = np.random.default_rng(child)
        m1, m2 = _random_pure(t.dM, rng), _random_pure(t.dM, rng)
        system = _random_pure(t.dA**n, rng) if n else np.ones((1, 1))
        worst = max(worst, distinguishability(t, n, m1, m2, system))
    for m1, m2, system in extra_inputs:
        worst = max(worst, distinguishability(t, n, m1, m2, system))
    return worst


def alternating_inputs(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Memory states ``|0>, |1>`` and the product ``psi_y psi_x psi_y ...`` of length ``n``."""
    sys = np.ones((1, 1), dtype=complex)
    for step in range(n):
        sys = np.kron(sys, pauli_eigenstate("y" if step % 2 == 0 else "x"))
    return pauli_eigenstate("z"), np.diag([0, 1]).astype(complex), sys
