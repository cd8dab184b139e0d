import math

import numpy as np
import pytest

from heisenberg_xy.analytic import steady_state_t0
from heisenberg_xy.entanglement import (
    SIGMA_YY,
    coherence_report,
    concurrence,
    concurrence_general,
    concurrence_x_form,
    partial_trace,
    project_to_density_matrix,
    random_density_matrix,
    random_single_qubit_unitary,
    random_x_state,
)
from heisenberg_xy.errors import DomainError, UsageError
from heisenberg_xy.model import ModelParams, SECOND_BLOCK, named_initial_state, pure_state

BELL = named_initial_state("bell_gg_ee")
GG = named_initial_state("gg")


def brute_force_concurrence(rho):
    """Eigenvalues of the non-Hermitian spin-flip product, straight from LAPACK."""
    r = rho @ SIGMA_YY @ rho.conj() @ SIGMA_YY
    lam = np.sort(np.abs(np.linalg.eigvals(r).real))[::-1]
    s = np.sqrt(lam)
    return max(0.0, s[0] - s[1] - s[2] - s[3])


def werner(p):
    phi3 = np.array([0, -1, 1, 0]) / math.sqrt(2)
    return p * pure_state(phi3) + (1 - p) * np.eye(4) / 4


def test_general_bell_and_product():
    assert math.isclose(concurrence_general(BELL).c, 1.0, abs_tol=1e-12)
    assert concurrence_general(GG).c == 0.0


@pytest.mark.parametrize("p, expected", [(0.0, 0.0), (0.4, 0.1), (1.0, 1.0), (1 / 3, 0.0), (0.8, 0.7)])
def test_werner_family(p, expected):
    rho = werner(p)
    # frozen values follow max(0, (3p - 1)/2), confirmed against the brute-force oracle
    assert abs(brute_force_concurrence(rho) - expected) < 1e-7
    assert abs(concurrence_general(rho).c - expected) < 1e-10
    assert abs(concurrence_x_form(rho).c - expected) < 1e-12


def test_general_matches_brute_force(rng):
    for rank in (1, 2, 4):
        for _ in range(30):
            rho = random_density_matrix(rng, rank)
            assert abs(concurrence_general(rho).c - brute_force_concurrence(rho)) < 1e-6


def test_lambdas_sorted_and_nonnegative(rng):
    for _ in range(50):
        res = concurrence_general(random_density_matrix(rng))
        assert np.all(res.lambdas >= 0)
        assert np.all(np.diff(res.lambdas) <= 0)
        s = np.sqrt(res.lambdas)
        assert abs(res.c - max(s[0] - s[1] - s[2] - s[3], 0.0)) < 1e-10


def test_general_rejects_invalid_state():
    with pytest.raises(DomainError):
        concurrence_general(0.5 * GG)


def test_x_form_vs_general_on_random_x_states(rng):
    worst = 0.0
    for _ in range(1000):
        rho = random_x_state(rng)
        xf = concurrence_x_form(rho)
        assert abs(xf.c - max(0.0, xf.c1, xf.c2)) < 1e-10
        worst = max(worst, abs(concurrence_general(rho).c - xf.c))
    assert worst < 1e-9


def test_x_form_lambdas_match_general(rng):
    for _ in range(50):
        rho = random_x_state(rng)
        np.testing.assert_allclose(concurrence_x_form(rho).lambdas, concurrence_general(rho).lambdas, atol=1e-9)


@pytest.mark.parametrize(
    "params, expected",
    [
        (ModelParams(1.0, 0.1, 0.1, 0.3), 0.09309),
        (ModelParams(1.0, 0.1, 0.458, 0.458), 0.28916),
    ],
)
def test_x_form_benchmark_steady_values(params, expected):
    assert abs(concurrence_x_form(steady_state_t0(params).rho).c - expected) < 5e-6


def test_x_form_diagonal_state_is_separable(rng):
    rho = np.diag(rng.dirichlet(np.ones(4))).astype(complex)
    res = concurrence_x_form(rho)
    assert res.c == 0.0 and res.c1 <= 0 and res.c2 <= 0


def test_x_form_rejects_pattern_violation():
    rho = named_initial_state("mixed_fig1").copy()
    rho[0, 1] = rho[1, 0] = 1e-6
    with pytest.raises(DomainError, match="rho12"):
        concurrence_x_form(rho)


def test_dispatch_uses_general_for_non_x(rng):
    rho = random_density_matrix(rng)
    assert concurrence(rho) == concurrence_general(rho).c
    rho = random_x_state(rng)
    assert concurrence(rho) == concurrence_x_form(rho).c


def test_local_unitary_invariance_rank_deficient(rng):
    # square roots of round-off sized eigenvalues cap the accuracy here
    for _ in range(50):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 4)))
        u = np.kron(random_single_qubit_unitary(rng), random_single_qubit_unitary(rng))
        assert abs(concurrence_general(rho).c - concurrence_general(u @ rho @ u.conj().T).c) < 1e-6


def test_range_and_product_states(rng):
    for _ in range(100):
        a = project_to_density_matrix_2(rng)
        b = project_to_density_matrix_2(rng)
        assert concurrence_general(np.kron(a, b)).c < 1e-10
        c = concurrence_general(random_density_matrix(rng, rank=int(rng.integers(1, 5)))).c
        assert 0.0 <= c <= 1.0


def project_to_density_matrix_2(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = g @ g.conj().T
    return m / np.trace(m).real


def test_local_unitary_invariance(rng):
    for _ in range(100):
        rho = random_density_matrix(rng)
        u = np.kron(random_single_qubit_unitary(rng), random_single_qubit_unitary(rng))
        assert abs(concurrence_general(rho).c - concurrence_general(u @ rho @ u.conj().T).c) < 1e-9


def test_partial_trace_examples(fig1):
    np.testing.assert_array_equal(partial_trace(GG, "A"), np.diag([0, 1]))
    np.testing.assert_allclose(partial_trace(BELL, "A"), np.eye(2) / 2, atol=1e-16)
    np.testing.assert_allclose(partial_trace(BELL, "B"), np.eye(2) / 2, atol=1e-16)
    ss = steady_state_t0(fig1).rho
    for keep in "AB":
        red = partial_trace(ss, keep)
        assert abs(red[0, 1]) < 1e-12 and abs(red[1, 0]) < 1e-12
    with pytest.raises(UsageError):
        partial_trace(GG, "C")


def test_partial_trace_of_product(rng):
    a = project_to_density_matrix_2(rng)
    b = project_to_density_matrix_2(rng)
    np.testing.assert_allclose(partial_trace(np.kron(a, b), "A"), a, atol=1e-15)
    np.testing.assert_allclose(partial_trace(np.kron(a, b), "B"), b, atol=1e-15)


def test_coherence_report_bell_states():
    rep = coherence_report(BELL)
    assert rep.local_coherence_a == 0 and rep.local_coherence_b == 0
    assert math.isclose(abs(rep.global_14), 0.5)
    phi2 = pure_state(np.array([0, 1, 1, 0]) / math.sqrt(2))
    rep = coherence_report(phi2)
    assert math.isclose(abs(rep.global_23), 0.5)
    assert rep.local_coherence_a == 0 and rep.local_coherence_b == 0


def test_coherence_report_steady_state(fig2):
    rep = coherence_report(steady_state_t0(fig2).rho)
    w, d, g = fig2.omega, fig2.delta, fig2.gamma
    alpha = 4 * (w**2 + d**2) + g**2
    assert math.isclose(abs(rep.global_14), abs(d * (2 * w + 1j * g)) / alpha, rel_tol=1e-12)
    assert rep.global_23 == 0
    for red in (rep.reduced_a, rep.reduced_b):
        assert abs(np.trace(red) - 1) < 1e-10
        assert np.max(np.abs(red - red.conj().T)) < 1e-10


def test_projection_helper(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = project_to_density_matrix(m)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho)[0] > -1e-12
    x = random_x_state(rng)
    assert max(abs(x[i, k]) for i, k in SECOND_BLOCK) == 0
