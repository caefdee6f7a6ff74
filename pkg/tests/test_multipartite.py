import math

import numpy as np
import pytest

from bloch.bloch_map import BlochVector, decode, encode
from bloch.errors import BasisError, BlochError, DegenerateSpectrumError, StateError, WeightError
from bloch.generator_bases import standard_basis
from bloch.matrix_kernel import partial_trace
from bloch.multipartite import (
    EntangledPairSpec,
    RodExperimentConfig,
    SectorLayout,
    chsh,
    chsh_correlations,
    display_order_ab,
    entangled_decompose,
    entangled_state,
    optimal_chsh_axes,
    parallel_sector_projection_check,
    product_compose,
    product_measurement_probs,
    rod_experiment,
    sector_offsets,
    sector_split,
    separable_compose,
    separable_singlet_mixture,
    singlet_expectation,
    singlet_spec,
    singlet_table,
    spin_observable,
)
from bloch.sampling import worker_rng

from .utils import random_density, random_observable, random_unit_axis, random_unitary

TSIRELSON = 2.0 * math.sqrt(2.0)
Z = (0.0, 0.0, 1.0)


def _random_spec(rng, dims):
    ua, ub = random_unitary(dims[0], rng), random_unitary(dims[1], rng)
    a1 = float(rng.uniform(0.05, 0.95))
    return EntangledPairSpec(
        a1, math.sqrt(1.0 - a1 * a1), float(rng.uniform(-math.pi, math.pi)), ua[:, 0], ua[:, 1], ub[:, 0], ub[:, 1]
    )


class TestLayout:
    def test_sector_offsets(self):
        off = sector_offsets([2, 3])
        assert off[(0,)] == range(0, 3)
        assert off[(1,)] == range(3, 11)
        assert off[(0, 1)] == range(11, 35)
        three = sector_offsets([2, 2, 2])
        assert list(three) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
        assert three[(0, 1, 2)] == range(36, 63)

    def test_scale_constants(self):
        lay = SectorLayout.standard(2, 3)
        assert lay.d_a == pytest.approx(math.sqrt(1 / 5))
        assert lay.d_b == pytest.approx(math.sqrt(2 / 5))
        assert lay.d_ab == pytest.approx(math.sqrt(2 / 5))
        assert lay.r0 == pytest.approx(1 / math.sqrt(5))

    def test_display_order(self):
        assert display_order_ab(SectorLayout.standard(2, 2)) == [0, 4, 1, 3, 8, 2, 5, 7, 6]


class TestProducts:
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)], ids=["2x2", "2x3", "3x3"])
    def test_product_compose_matches_kron(self, dims, rng):
        lay = SectorLayout.standard(*dims)
        da, db = random_density(dims[0], rng), random_density(dims[1], rng)
        r = product_compose(encode(da, lay.basis_a), encode(db, lay.basis_b), lay)
        assert np.allclose(r.components, encode(np.kron(da, db), lay.basis).components, atol=1e-12)
        dec = sector_split(r, lay)
        assert np.allclose(dec.r_ab, np.outer(dec.r_a.components, dec.r_b.components).ravel(), atol=1e-12)
        assert np.allclose(decode(dec.r_a), da, atol=1e-10)

    def test_split_with_reference(self, rng):
        lay = SectorLayout.standard(2, 2)
        r = encode(random_density(4, rng), lay.basis)
        ref = np.zeros(9)
        dec = sector_split(r, lay, reference_ab=ref)
        assert np.allclose(dec.reassemble().components, r.components, atol=1e-12)

    def test_split_rejects_a_non_tensorial_basis(self, rng):
        lay = SectorLayout.standard(2, 2)
        r = encode(random_density(4, rng), standard_basis(4))
        assert r.basis.size == lay.basis.size
        with pytest.raises(BasisError):
            sector_split(r, lay)

    def test_separable_compose_validates_weights(self):
        lay = SectorLayout.standard(2, 2)
        up = BlochVector(Z, lay.basis_a)
        with pytest.raises(WeightError):
            separable_compose([(0.6, up, up), (0.6, up, up)], lay)


class TestEntangled:
    def test_decomposition_identities_over_random_specs(self, rng):
        dims_choices = [(2, 2), (2, 3), (3, 2), (3, 3)]
        for k in range(100):
            dims = dims_choices[k % 4]
            spec = _random_spec(rng, dims)
            dec = entangled_decompose(spec)
            state = entangled_state(spec)
            r = encode(state, dec.layout.basis)
            assert np.max(np.abs(dec.reassemble().components - r.components)) < 1e-10
            assert np.max(np.abs(decode(dec.r_a) - partial_trace(state.matrix, dims, "A"))) < 1e-10
            assert np.max(np.abs(decode(dec.r_b) - partial_trace(state.matrix, dims, "B"))) < 1e-10
            assert abs(float(dec.r_int @ (r.components - dec.r_int))) < 1e-10

    def test_singlet_interference_vector(self):
        dec = entangled_decompose(singlet_spec())
        lay = dec.layout
        third = 1.0 / math.sqrt(3.0)
        assert np.allclose(dec.r_a.components, 0.0) and np.allclose(dec.r_b.components, 0.0)
        assert dec.r_int[lay.ab_index(1, 1)] == pytest.approx(-third)
        assert dec.r_int[lay.ab_index(2, 2)] == pytest.approx(-third)
        assert dec.r_int[lay.ab_index(1, 2)] == pytest.approx(0.0, abs=1e-15)

    def test_separable_mixture_differs_only_by_interference(self):
        lay = SectorLayout.standard(2, 2)
        singlet = encode(entangled_state(singlet_spec()), lay.basis)
        mixture = separable_singlet_mixture(Z, lay)
        r_int = entangled_decompose(singlet_spec()).r_int
        assert np.allclose(singlet.components - mixture.components, r_int, atol=1e-12)

    def test_separable_ab_sector_is_not_an_outer_product(self):
        lay = SectorLayout.standard(2, 2)
        dec = sector_split(separable_singlet_mixture(Z, lay), lay)
        outer = np.outer(dec.r_a.components, dec.r_b.components).ravel()
        assert np.max(np.abs(dec.r_ab - outer)) > 0.1

    def test_in_basis_measurement(self):
        a1 = math.sqrt(0.7)
        spec = EntangledPairSpec.canonical(a1, 0.4)
        obs = np.diag([1.0, 2.0])
        report = parallel_sector_projection_check(spec, obs, obs)
        assert report.ok
        assert np.allclose(report.joint_weights, [[0.0, 0.7], [0.3, 0.0]], atol=1e-12)
        assert np.allclose(report.weights_a, [0.7, 0.3]) and np.allclose(report.weights_b, [0.3, 0.7])

        lay = SectorLayout.standard(2, 2)
        n_psi_phi = encode(np.diag([0.0, 1.0, 0.0, 0.0]), lay.basis).components
        n_phi_psi = encode(np.diag([0.0, 0.0, 1.0, 0.0]), lay.basis).components
        dec = entangled_decompose(spec)
        assert abs(float(dec.r_int @ (n_psi_phi - n_phi_psi))) < 1e-12
        r = encode(entangled_state(spec), lay.basis)
        w = np.array([0.7, 0.3])
        r_par = w @ np.vstack([n_psi_phi, n_phi_psi])
        assert abs(float((r.components - r_par) @ (n_psi_phi - n_phi_psi))) < 1e-12

    def test_spec_validation(self):
        e = np.eye(2)
        with pytest.raises(BasisError):
            EntangledPairSpec(0.6, 0.8, 0.0, e[0], e[0], e[0], e[1])
        with pytest.raises(StateError):
            EntangledPairSpec(0.6, 0.6, 0.0, e[0], e[1], e[0], e[1])
        with pytest.raises(BasisError):
            entangled_decompose(EntangledPairSpec.canonical(0.6, 0.0, (3, 3)), SectorLayout.standard(3, 3))

    def test_canonical_spec_keeps_an_explicit_a2(self):
        assert EntangledPairSpec.canonical(0.6, 0.0, a2=0.8).a2 == 0.8
        with pytest.raises(StateError):
            EntangledPairSpec.canonical(0.6, 0.0, a2=0.1)

    def test_parallel_sector_projection(self, rng):
        for dims in [(2, 2), (2, 3)]:
            spec = _random_spec(rng, dims)
            report = parallel_sector_projection_check(
                spec, random_observable(dims[0], rng), random_observable(dims[1], rng)
            )
            assert report.ok
            assert report.joint_weights.sum() == pytest.approx(1.0)


class TestSinglet:
    def test_expectation_is_minus_dot_product(self, rng):
        lay = SectorLayout.standard(2, 2)
        r = encode(entangled_state(singlet_spec()), lay.basis)
        for _ in range(10_000):
            a, b = random_unit_axis(rng), random_unit_axis(rng)
            table = product_measurement_probs(r, spin_observable(a), spin_observable(b))
            e = table[1, 1] + table[0, 0] - table[0, 1] - table[1, 0]
            assert e == pytest.approx(-float(a @ b), abs=1e-12)
            assert np.allclose(table, singlet_table(a, b), atol=1e-12)
            assert singlet_expectation(a, b) == -float(a @ b)

    def test_tables_are_order_invariant(self, rng):
        a, b = random_unit_axis(rng), random_unit_axis(rng)
        assert np.array_equal(singlet_table(a, b), singlet_table(b, a).T)

    def test_optimal_chsh_is_tsirelson(self):
        assert chsh(*optimal_chsh_axes()) == pytest.approx(TSIRELSON, abs=1e-12)

    def test_degenerate_axes_give_two(self):
        assert chsh(Z, Z, Z, Z) == pytest.approx(2.0, abs=1e-15)

    def test_no_axis_set_beats_tsirelson(self, rng):
        for _ in range(100_000):
            axes = [random_unit_axis(rng) for _ in range(4)]
            assert chsh(*axes) <= TSIRELSON + 1e-9

    def test_degenerate_factor_observable(self):
        lay = SectorLayout.standard(2, 2)
        r = encode(entangled_state(singlet_spec()), lay.basis)
        with pytest.raises(DegenerateSpectrumError):
            product_measurement_probs(r, np.eye(2), spin_observable(Z))


class TestRod:
    def test_parallel_axes_are_perfectly_anticorrelated(self):
        res = rod_experiment(RodExperimentConfig(Z, Z, 20_000, seed=3))
        assert res.counts[0, 0] == 0 and res.counts[1, 1] == 0
        assert res.e_hat == -1.0

    def test_replay_is_identical(self):
        cfg = RodExperimentConfig((1.0, 0.0, 0.0), (0.6, 0.0, 0.8), 50_001, seed=17)
        a = rod_experiment(cfg, workers=3)
        b = rod_experiment(cfg, workers=3)
        assert np.array_equal(a.counts, b.counts)
        assert a.shots == 50_001

    def test_explicit_stream(self):
        cfg = RodExperimentConfig(Z, (1.0, 0.0, 0.0), 1000, seed=0)
        a = rod_experiment(cfg, rng=worker_rng(8))
        b = rod_experiment(cfg, rng=worker_rng(8))
        assert np.array_equal(a.counts, b.counts)

    def test_sixty_degrees_converges(self):
        n_b = (math.sin(math.pi / 3), 0.0, math.cos(math.pi / 3))
        shots = 1_000_000
        band = 3.0 * math.sqrt((1.0 - 0.25) / shots)

        def close(seed):
            return abs(rod_experiment(RodExperimentConfig(Z, n_b, shots, seed), workers=2).e_hat + 0.5) <= band

        assert close(31) or close(62)

    def test_order_swap_agrees_within_noise(self):
        n_a, n_b = (0.0, 0.0, 1.0), (math.sin(1.0), 0.0, math.cos(1.0))
        shots = 1_000_000
        band = 3.0 * np.sqrt(2.0 * singlet_table(n_a, n_b) * (1.0 - singlet_table(n_a, n_b)) / shots)

        def agree(seed):
            cfg = RodExperimentConfig(n_a, n_b, shots, seed)
            ab = rod_experiment(cfg, order="AB").counts / shots
            ba = rod_experiment(cfg, order="BA").counts / shots
            return bool(np.all(np.abs(ab - ba) <= band))

        assert agree(101) or agree(202)

    def test_monte_carlo_chsh_reaches_tsirelson(self):
        s = chsh(*optimal_chsh_axes(), mode="monte_carlo", shots=4_000_000, seed=42, workers=2)
        assert abs(s - TSIRELSON) < 0.01

    @pytest.mark.parametrize("shots", [1, 2, 3], ids=["one", "two", "three"])
    def test_monte_carlo_chsh_needs_a_shot_per_pair(self, shots):
        with pytest.raises(BlochError, match="one per pair"):
            chsh(*optimal_chsh_axes(), mode="monte_carlo", shots=shots, seed=1)

    def test_monte_carlo_chsh_with_one_shot_per_pair(self):
        e = chsh_correlations(*optimal_chsh_axes(), mode="monte_carlo", shots=4, seed=1)
        assert np.array_equal(np.abs(e), np.ones(4))

    def test_monte_carlo_correlations_replay(self):
        axes = optimal_chsh_axes()
        a = chsh_correlations(*axes, mode="monte_carlo", shots=40_000, seed=9)
        b = chsh_correlations(*axes, mode="monte_carlo", shots=40_000, seed=9)
        assert np.array_equal(a, b)

    def test_config_validation(self):
        with pytest.raises(StateError):
            RodExperimentConfig((1.0, 1.0, 0.0), Z, 10, seed=0)
        with pytest.raises(BlochError, match="shots") as exc:
            RodExperimentConfig(Z, Z, 0, seed=0)
        assert not isinstance(exc.value, WeightError)
        with pytest.raises(StateError):
            rod_experiment(RodExperimentConfig(Z, Z, 10, seed=0), order="XY")
