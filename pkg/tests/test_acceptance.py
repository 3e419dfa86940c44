"""Acceptance criteria 1-8, each checked at its stated tolerance and time budget.

Every test appends one ``PASS``/``FAIL`` line to the acceptance summary
printed at the end of the pytest run. Running this file directly prints the
same lines without pytest.
"""

import math
import time

import numpy as np
import pytest

from cdcroots.channels import SCHRODINGER, bistochastic_cdc, frobenius_distance, is_completely_positive, power
from cdcroots.fcs import chain_generator, check_k_dependence
from cdcroots.memory import (
    branch_concatenation,
    construct_strictly_forgetful,
    counterexample_channel,
    entangled_input_check,
    extract_branch,
    forgetfulness_from_generators,
    is_strictly_forgetful,
    jordan_tail_spec,
    parameterized_branch,
    pauli_eigenstate,
    words_vanish,
)
from cdcroots.memory import is_completely_positive as memory_cp
from cdcroots.roots import (
    PauliDiagonalParams,
    QubitRootSpec,
    bloch_eigenvalues,
    bloch_trace_condition,
    cb_lower_bound_root,
    constrained_phi,
    jordan_block_sizes,
    pauli_diagonal_channel,
    perturb_root,
    qubit_maximal_root,
    rotation_r1,
    tetrahedron_check,
)

SEED = 1729


def record(log, number, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}; {elapsed:.2f} s (budget {budget:g} s)"
    log.append(line)
    print(line)
    return ok


def residual(s, k):
    target = bistochastic_cdc(s.dim, picture=s.picture).in_basis(s.basis)
    return frobenius_distance(power(s, k), target)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


def qubit_root_specs(n, rng):
    specs = []
    while len(specs) < n:
        l2, l3 = rng.uniform(-1, 1, size=2)
        if min(abs(l2), abs(l3)) < 0.1 or abs(l2) + abs(l3) > 1:
            continue
        specs.append(QubitRootSpec(l2, l3, rng.uniform(-math.pi, math.pi), random_rotation(rng)))
    return specs


def test_criterion_1_root_order_bound(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    p2, _ = perturb_root(2)
    qubit = [qubit_maximal_root(s) for s in qubit_root_specs(50, rng)]
    d2 = [p2] + qubit
    s3 = max(residual(s, 3) for s in d2)
    s2 = min(residual(s, 2) for s in d2)
    p3, _ = perturb_root(3)
    s8, s7 = residual(p3, 8), residual(p3, 7)
    elapsed = time.perf_counter() - t0
    ok = s3 <= 1e-9 and s2 >= 1e-4 and s8 <= 1e-8 and s7 >= 1e-5
    detail = f"d=2 (perturbation + 50 qubit roots) max|S^3-CDC|={s3:.2e}, min|S^2-CDC|={s2:.2e}; d=3 |S^8-CDC|={s8:.2e}, |S^7-CDC|={s7:.2e}"
    assert record(acceptance_log, 1, "root-order bound", ok, detail, elapsed, 1.0)


def test_criterion_2_tetrahedron_equals_cp(acceptance_log):
    t0 = time.perf_counter()
    lams = np.random.default_rng(SEED).uniform(-1.2, 1.2, size=(1000, 3))
    agree = sum(
        tetrahedron_check(PauliDiagonalParams(*l)) == is_completely_positive(pauli_diagonal_channel(PauliDiagonalParams(*l)), 1e-9)[0]
        for l in lams
    )
    inside = sum(tetrahedron_check(PauliDiagonalParams(*l)) for l in lams)
    elapsed = time.perf_counter() - t0
    detail = f"{agree}/1000 agree ({inside} inside the tetrahedron)"
    assert record(acceptance_log, 2, "tetrahedron <=> CP", agree == 1000, detail, elapsed, 5.0)


def test_criterion_3_qubit_constraint(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, cond = 0.0, True
    for _ in range(500):
        theta = rng.uniform(-math.pi, math.pi)
        l2, l3 = rng.choice([-1, 1], size=2) * rng.uniform(0.01, 1, size=2)
        worst = max(worst, float(np.max(bloch_eigenvalues(theta, l2, l3))))
        cond &= bloch_trace_condition(rotation_r1(theta, constrained_phi(theta, l2, l3)), l2, l3)
    elapsed = time.perf_counter() - t0
    detail = f"max |eigenvalue of R1 L| = {worst:.2e} over 500 samples, det/trace conditions {'hold' if cond else 'fail'}"
    assert record(acceptance_log, 3, "qubit constraint", worst <= 1e-10 and cond, detail, elapsed, 2.0)


def test_criterion_4_cb_witness(acceptance_log):
    t0 = time.perf_counter()
    r2, r3 = cb_lower_bound_root(2), cb_lower_bound_root(3)
    cp2 = is_completely_positive(r2.channel)[0]
    cp3 = is_completely_positive(r3.channel)[0]
    e2, e3 = abs(r2.witness - 0.5), abs(r3.witness - 2 / 3)
    elapsed = time.perf_counter() - t0
    ok = cp2 and cp3 and e2 <= 1e-10 and e3 <= 1e-10
    detail = f"d=2 witness {r2.witness:.12f} (CP {cp2}), d=3 witness {r3.witness:.12f} (CP {cp3})"
    assert record(acceptance_log, 4, "cb-norm witness", ok, detail, elapsed, 1.0)


def test_criterion_5_k_dependence(acceptance_log):
    t0 = time.perf_counter()
    g = chain_generator(qubit_maximal_root(QubitRootSpec(0.5, 0.4, 0.3)))
    v3 = check_k_dependence(g, 3, samples=200, seed=SEED).max_violation
    v2 = check_k_dependence(g, 2, samples=200, seed=SEED).max_violation
    elapsed = time.perf_counter() - t0
    detail = f"gap 3 violation {v3:.2e}, gap 2 violation {v2:.2e} (200 pairs, rho = 1/2)"
    assert record(acceptance_log, 5, "k-dependence", v3 <= 1e-9 and v2 >= 1e-6, detail, elapsed, 10.0)


def test_criterion_6_forgetful_construction(acceptance_log):
    t0 = time.perf_counter()
    t, eta = construct_strictly_forgetful(jordan_tail_spec(2, 2, 2))
    _, lam = memory_cp(t)
    v = is_strictly_forgetful(t)
    dist = entangled_input_check(t, 3, samples=100, seed=SEED)
    elapsed = time.perf_counter() - t0
    ok = lam >= -1e-9 and v.strictly_forgetful and v.depth == 3 and dist <= 1e-9
    detail = f"eta={eta:.4f}, lambda_min(Choi)={lam:.2e}, verdict {v.strictly_forgetful} depth {v.depth}, n=3 entangled distinguishability {dist:.2e}"
    assert record(acceptance_log, 6, "strictly forgetful construction", ok, detail, elapsed, 30.0)


def bloch_grid(n):
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = np.pi * (1 + 5**0.5) * k
    r = np.sqrt(1 - z * z)
    pauli = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    return [(np.eye(2) + x * pauli[0] + y * pauli[1] + zz * pauli[2]) / 2 for x, y, zz in zip(r * np.cos(phi), r * np.sin(phi), z)]


def test_criterion_7_counterexample(acceptance_log):
    t0 = time.perf_counter()
    a = b = 0.1
    t = counterexample_channel(a, b)
    f = extract_branch(t)
    err = 0.0
    for n in range(1, 7):
        seq = [pauli_eigenstate("y"), pauli_eigenstate("x")] * n
        expect = np.diag([1, 0, (-a * b) ** n, (a * b) ** n])
        err = max(err, float(np.max(np.abs(branch_concatenation(f, seq) - expect))))
    verdict = is_strictly_forgetful(t).strictly_forgetful
    orders = [jordan_block_sizes(parameterized_branch(f, s)[1:, 1:]) for s in bloch_grid(200)]
    roots_ok = all(o is not None and max(o) <= 3 for o in orders)
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-12 and not verdict and roots_ok
    detail = f"alternating product error {err:.2e} (n=1..6), verdict {verdict}, 200/200 Bloch-grid branches nilpotent of order <= 3: {roots_ok}"
    assert record(acceptance_log, 7, "counterexample", ok, detail, elapsed, 10.0)


def random_family(rng, nilpotent, n=3, count=4):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    gens = [np.triu(rng.normal(size=(n, n)), 1) for _ in range(count)]
    if not nilpotent:
        gens[rng.integers(count)] += 0.5 * np.tril(rng.normal(size=(n, n)))
    return np.array([q @ g @ q.conj().T for g in gens])


def test_criterion_8_oracle_equivalence(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    agree, true_count = 0, 0
    for i in range(50):
        gens = random_family(rng, nilpotent=i % 2 == 0)
        verdict = forgetfulness_from_generators(gens).strictly_forgetful
        oracle = words_vanish(gens, 3)
        agree += verdict == oracle
        true_count += oracle
    elapsed = time.perf_counter() - t0
    detail = f"{agree}/50 families agree with the 4^3-word oracle ({true_count} nilpotent)"
    assert record(acceptance_log, 8, "oracle equivalence", agree == 50, detail, elapsed, 10.0)


if __name__ == "__main__":
    log: list[str] = []
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn(log)
            except AssertionError:
                pass
