import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import random_local_unitary
from qdlab.correlations import (
    OptimizerConfig,
    MeasurementBasis,
    ZeroDiscordCandidate,
    classical_correlation,
    concurrence,
    correlation_report,
    gmqd_bruteforce,
    gmqd_eig,
    gmqd_svd,
    measured_mutual_information,
    mutual_information,
    optimize_measurement,
    quantum_discord,
    top_direction,
)
from qdlab.errors import OptimizerFailure
from qdlab.states import (
    MAXIMALLY_MIXED,
    SY,
    DensityMatrix,
    bell_diagonal,
    product_state,
    pure_state,
    qubit_state,
    random_bell_diagonal_c,
    random_state,
)

LN2 = np.log(2.0)


def _h(w):
    w = np.asarray(w, dtype=float)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log(w)) / LN2)


def _measured_mi_oracle(rho, n):
    """H(rho_B) - sum_k p_k H(rho_B|k) with explicit partial traces."""
    a = np.asarray(rho).reshape(2, 2, 2, 2)
    rho_b = np.einsum("ijik->jk", a)
    total = _h(np.linalg.eigvalsh(rho_b))
    for sign in (1, -1):
        e = qubit_state(sign * np.asarray(n))
        cond = np.einsum("ji,ikjl->kl", e, a)
        p = np.trace(cond).real
        if p > 1e-14:
            total -= p * _h(np.linalg.eigvalsh(cond / p))
    return total


def _grid_max_oracle(rho, nt=25, nph=48):
    best = -np.inf
    for t in np.linspace(0, np.pi, nt):
        for ph in np.linspace(0, 2 * np.pi, nph, endpoint=False):
            n = [np.sin(t) * np.cos(ph), np.sin(t) * np.sin(ph), np.cos(t)]
            best = max(best, _measured_mi_oracle(rho, n))
    return best


def _bell_diagonal_classical(c):
    # known closed form for Bell-diagonal states: binary-entropy deficit of max|c_i|
    m = np.max(np.abs(c))
    return 1.0 - _h([(1 + m) / 2, (1 - m) / 2])


def _bell_diagonal_eigs(c):
    c1, c2, c3 = c
    return 0.25 * np.array(
        [1 - c1 - c2 - c3, 1 - c1 + c2 + c3, 1 + c1 - c2 + c3, 1 + c1 + c2 - c3]
    )


def _naive_concurrence(rho):
    a = np.asarray(rho)
    yy = np.kron(SY, SY)
    w = np.linalg.eigvals(a @ yy @ a.conj() @ yy)
    lam = np.sort(np.sqrt(np.clip(w.real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def _random_zero_discord(rng):
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    r1, r2 = (v * rng.uniform() ** (1 / 3) / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
    return ZeroDiscordCandidate(rng.uniform(), n, qubit_state(r1), qubit_state(r2)).state()


class TestMutualInformation:
    def test_examples(self, bell):
        assert_allclose(mutual_information(MAXIMALLY_MIXED), 0.0, atol=1e-14)
        assert_allclose(mutual_information(bell), 2.0, atol=1e-12)
        prod = product_state(qubit_state([0.2, 0.1, 0.3]), qubit_state([0, 0.5, -0.5]))
        assert_allclose(mutual_information(prod), 0.0, atol=1e-12)

    def test_bounds(self, random_states):
        for rho in random_states[:200]:
            assert -1e-12 <= mutual_information(rho) <= 2.0 + 1e-12


class TestMeasuredMutualInformation:
    def test_bell_z_basis(self, bell):
        assert_allclose(measured_mutual_information(bell, MeasurementBasis(0.0, 0.0)), 1.0, atol=1e-12)

    def test_trivial_states(self):
        prod = product_state(qubit_state([0.2, 0.1, 0.3]), qubit_state([0, 0.5, -0.5]))
        for basis in (MeasurementBasis(0.3, 1.0), MeasurementBasis(1.2, 4.0)):
            assert_allclose(measured_mutual_information(prod, basis), 0.0, atol=1e-12)
            assert_allclose(measured_mutual_information(MAXIMALLY_MIXED, basis), 0.0, atol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.floats(0, np.pi),
        st.floats(0, 2 * np.pi),
        st.sampled_from("AB"),
    )
    def test_matches_oracle(self, seed, theta, phi, side):
        rho = random_state(np.random.default_rng(seed))
        basis = MeasurementBasis(theta, phi)
        target = rho if side == "A" else rho.swapped()
        assert_allclose(
            measured_mutual_information(rho, basis, side),
            _measured_mi_oracle(target, basis.n),
            atol=1e-12,
        )

    def test_projective_measurement_with_certain_outcome(self):
        # |00>: measuring along z gives one outcome with probability 1, the other 0
        rho = pure_state([1, 0, 0, 0])
        assert_allclose(measured_mutual_information(rho, MeasurementBasis(0.0, 0.0)), 0.0, atol=1e-14)


class TestMeasurementBasis:
    def test_canonical_folds_theta(self):
        b = MeasurementBasis(2.5, 0.4).canonical()
        assert 0 <= b.theta <= np.pi / 2
        assert_allclose(np.abs(b.n @ MeasurementBasis(2.5, 0.4).n), 1.0)

    def test_from_vector(self):
        n = np.array([0.3, -0.4, 0.5])
        assert_allclose(MeasurementBasis.from_vector(n).n, n / np.linalg.norm(n))

    def test_projectors_complete(self):
        e1, e2 = MeasurementBasis(0.7, 2.0).projectors()
        assert_allclose(e1 + e2, np.eye(2))
        assert_allclose(e1 @ e1, e1, atol=1e-15)


class TestClassicalCorrelation:
    def test_bell(self, bell):
        c, _ = classical_correlation(bell)
        assert_allclose(c, 1.0, atol=1e-6)
        d, _ = quantum_discord(bell)
        assert_allclose(d, 1.0, atol=1e-6)

    def test_product_and_mixed(self):
        prod = product_state(qubit_state([0.2, 0.1, 0.3]), qubit_state([0, 0.5, -0.5]))
        assert classical_correlation(prod)[0] == pytest.approx(0.0, abs=1e-9)
        assert quantum_discord(MAXIMALLY_MIXED)[0] == pytest.approx(0.0, abs=1e-12)

    def test_not_below_independent_grid(self, random_states):
        for rho in random_states[:4]:
            for side in "AB":
                c, basis = classical_correlation(rho, side)
                target = rho if side == "A" else rho.swapped()
                assert c >= _grid_max_oracle(target) - 1e-12
                assert_allclose(_measured_mi_oracle(target, basis.n), c, atol=1e-12)

    def test_bell_diagonal_closed_form(self, rng):
        for _ in range(30):
            c = random_bell_diagonal_c(rng)
            rho = bell_diagonal(c)
            cc, basis = classical_correlation(rho)
            assert_allclose(cc, _bell_diagonal_classical(c), atol=1e-9)
            mi = 2.0 - _h(_bell_diagonal_eigs(c))
            assert_allclose(quantum_discord(rho)[0], mi - _bell_diagonal_classical(c), atol=1e-9)
            k = int(np.argmax(np.abs(c)))
            if np.sort(np.abs(c))[-1] - np.sort(np.abs(c))[-2] > 1e-3:
                assert abs(basis.n[k]) > 1 - 1e-6

    def test_side_b_via_swap(self, random_states):
        rho = random_states[7]
        assert_allclose(
            quantum_discord(rho, "B")[0], quantum_discord(rho.swapped(), "A")[0], atol=1e-12
        )

    def test_bad_side(self, bell):
        with pytest.raises(ValueError):
            quantum_discord(bell, "C")

    def test_refinement_failure(self, random_states):
        with pytest.raises(OptimizerFailure):
            optimize_measurement(random_states[0], "A", OptimizerConfig(max_iter=1))

    def test_flat_landscape(self, bell):
        opt = optimize_measurement(bell)
        assert opt.flat
        assert not optimize_measurement(bell_diagonal((0.5, 0.2, 0.1))).flat


class TestGeometricDiscord:
    def test_examples(self, bell):
        assert_allclose(gmqd_svd(bell)[0], 0.5, atol=1e-12)
        assert_allclose(gmqd_svd(bell_diagonal((1, -0.6, 0.6)))[0], 0.18, atol=1e-12)
        assert_allclose(gmqd_svd(MAXIMALLY_MIXED)[0], 0.0, atol=1e-16)
        assert_allclose(gmqd_eig(MAXIMALLY_MIXED)[0], 0.0, atol=1e-16)
        value, e = gmqd_eig(bell_diagonal((1, -0.6, 0.6)))
        assert_allclose(value, 0.18, atol=1e-12)
        assert_allclose(e, [1, 0, 0], atol=1e-12)

    def test_bell_diagonal_closed_form(self, rng):
        for _ in range(100):
            c = random_bell_diagonal_c(rng)
            c2 = np.sort(c**2)
            assert_allclose(gmqd_svd(bell_diagonal(c))[0], 0.25 * (c2[0] + c2[1]), atol=1e-14)

    def test_route_equivalence(self, random_states):
        gaps = [abs(gmqd_svd(r)[0] - gmqd_eig(r)[0]) for r in random_states]
        assert max(gaps) <= 1e-12

    def test_e_tilde_sign_and_norm(self, random_states):
        for rho in random_states[:100]:
            e = gmqd_eig(rho)[1]
            assert_allclose(np.linalg.norm(e), 1.0, atol=1e-12)
            assert e[np.flatnonzero(np.abs(e) > 1e-12)[0]] > 0

    def test_degenerate_flag(self, bell):
        assert top_direction(bell).degenerate
        assert not top_direction(bell_diagonal((1, -0.6, 0.6))).degenerate

    @pytest.mark.parametrize(
        "c, expected", [((-1, -1, -1), 0.5), ((1, -0.6, 0.6), 0.18)]
    )
    def test_bruteforce_examples(self, c, expected):
        value, cand = gmqd_bruteforce(bell_diagonal(c))
        assert_allclose(value, expected, atol=1e-4)
        chi = cand.state()
        assert_allclose(np.sum(np.abs(np.asarray(bell_diagonal(c)) - np.asarray(chi)) ** 2), value, atol=1e-12)

    def test_bruteforce_random(self, random_states):
        for rho in random_states[:3]:
            ref = gmqd_svd(rho)[0]
            value = gmqd_bruteforce(rho)[0]
            assert ref - 1e-4 <= value <= ref + 1e-4

    def test_bruteforce_zero_discord(self, rng):
        assert gmqd_bruteforce(_random_zero_discord(rng))[0] <= 1e-6

    def test_bruteforce_failure(self, bell):
        with pytest.raises(OptimizerFailure):
            gmqd_bruteforce(bell, OptimizerConfig(max_iter=3))

    def test_bruteforce_is_seeded(self, random_states):
        cfg = OptimizerConfig(restarts=4, seed=5)
        assert gmqd_bruteforce(random_states[0], cfg)[0] == gmqd_bruteforce(random_states[0], cfg)[0]

    def test_zero_discord_states(self, rng):
        for _ in range(100):
            chi = _random_zero_discord(rng)
            assert gmqd_svd(chi)[0] <= 1e-10
        for _ in range(5):
            assert quantum_discord(_random_zero_discord(rng))[0] <= 1e-6


class TestConcurrence:
    def test_examples(self, bell):
        assert_allclose(concurrence(bell), 1.0, atol=1e-12)
        assert concurrence(MAXIMALLY_MIXED) == pytest.approx(0.0, abs=1e-14)
        assert_allclose(concurrence(pure_state([0.6, 0, 0, 0.8])), 0.96, atol=1e-12)

    def test_pure_states(self, rng):
        for _ in range(50):
            psi = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi /= np.linalg.norm(psi)
            expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
            assert_allclose(concurrence(pure_state(psi)), expected, atol=1e-12)

    def test_against_naive_formula(self, random_states):
        for rho in random_states[:200]:
            assert_allclose(concurrence(rho), _naive_concurrence(rho), atol=1e-9)

    def test_bell_diagonal(self, rng):
        for _ in range(50):
            c = random_bell_diagonal_c(rng)
            expected = max(0.0, 2 * _bell_diagonal_eigs(c).max() - 1)
            assert_allclose(concurrence(bell_diagonal(c)), expected, atol=1e-12)


class TestInvariance:
    def test_local_unitaries(self, rng, random_states):
        for rho in random_states[:5]:
            u = random_local_unitary(rng)
            rot = DensityMatrix(u @ np.asarray(rho) @ u.conj().T)
            assert_allclose(gmqd_svd(rot)[0], gmqd_svd(rho)[0], atol=1e-8)
            assert_allclose(concurrence(rot), concurrence(rho), atol=1e-8)
            assert_allclose(quantum_discord(rot)[0], quantum_discord(rho)[0], atol=1e-8)


class TestReport:
    def test_bell_report(self, bell):
        rep = correlation_report(bell)
        assert_allclose([rep.mutual_info, rep.classical_corr, rep.discord], [2, 1, 1], atol=1e-9)
        assert_allclose(rep.gmqd, 0.5, atol=1e-12)
        assert_allclose(rep.k_max, 1.0, atol=1e-12)
        assert rep.e_degenerate and rep.measurement_flat
        js = rep.to_json()
        assert isinstance(js["e_tilde"], list) and len(js["singular_values"]) == 3

    def test_config_json(self):
        cfg = OptimizerConfig(grid_theta=8, seed=3)
        assert OptimizerConfig.from_json(cfg.to_json()) == cfg
        assert OptimizerConfig.from_json(None) == OptimizerConfig()
        with pytest.raises(ValueError):
            OptimizerConfig.from_json({"grid": 3})
