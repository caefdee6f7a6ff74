import math

import numpy as np
import pytest
from scipy.stats import chisquare

from bloch.bloch_map import OperatorState, decode, encode, qubit_from_spherical
from bloch.errors import BlochError, DegenerateSpectrumError, DimensionError, WeightError
from bloch.generator_bases import e_constant, reorder, standard_basis, superposition_basis
from bloch.measurement_engine import (
    BarycentricCoords,
    born_probabilities,
    classify,
    edge_fraction,
    immersion_path,
    parallel_component,
    project_onto_simplex,
    repeat_measurement,
    run_measurement,
    run_measurement_parallel,
    sample_counts,
    sample_membrane,
    sample_uniform_simplex,
    shoelace_area,
    simplex_from_observable,
    simplex_volume,
    subregion_fraction,
    three_sigma,
    vertex_coordinates_2d,
)
from bloch.sampling import worker_rng

from .utils import random_density, random_observable, random_unitary

SIGMA3 = np.diag([1.0, -1.0])
UP = np.diag([1.0, 0.0])


class TestSimplexGeometry:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6], ids=["N2", "N3", "N4", "N5", "N6"])
    def test_regular_simplex(self, n, rng):
        s = simplex_from_observable(random_observable(n, rng), standard_basis(n))
        v = s.vertex_matrix
        gram = v @ v.T
        assert np.allclose(np.diag(gram), 1.0, atol=1e-10)
        off = gram[~np.eye(n, dtype=bool)]
        assert np.allclose(off, -1.0 / (n - 1), atol=1e-10)
        edges = [np.linalg.norm(v[i] - v[j]) for i in range(n) for j in range(i + 1, n)]
        assert np.allclose(edges, math.sqrt(2.0 * n / (n - 1)), atol=1e-10)

    def test_eigenvalues_ascending(self, rng):
        s = simplex_from_observable(random_observable(4, rng), standard_basis(4))
        assert np.allclose(s.eigenvalues, [1.0, 2.0, 3.0, 4.0])

    def test_triangle_angle_and_area(self):
        p = vertex_coordinates_2d()
        u, w = p[1] - p[0], p[2] - p[0]
        angle = math.acos(float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w)))
        assert angle == pytest.approx(math.pi / 3.0, abs=1e-12)
        assert np.linalg.norm(u) == pytest.approx(math.sqrt(3.0), abs=1e-12)
        assert shoelace_area(p) == pytest.approx(3.0 * math.sqrt(3.0) / 4.0, abs=1e-12)
        assert simplex_volume(3) == pytest.approx(3.0 * math.sqrt(3.0) / 4.0, abs=1e-12)
        assert simplex_volume(2) == pytest.approx(2.0, abs=1e-12)

    def test_degenerate_and_mismatched_observables(self):
        with pytest.raises(DegenerateSpectrumError):
            simplex_from_observable(np.diag([1.0, 1.0, 2.0]), standard_basis(3))
        with pytest.raises(DimensionError):
            simplex_from_observable(SIGMA3, standard_basis(3))


class TestBornRule:
    @pytest.mark.parametrize("n", [2, 3, 4, 5], ids=["N2", "N3", "N4", "N5"])
    def test_three_way_agreement(self, n, rng):
        basis = standard_basis(n)
        worst = 0.0
        for _ in range(200):
            d = random_density(n, rng, rank=int(rng.integers(1, n + 1)))
            s = simplex_from_observable(random_observable(n, rng), basis)
            trace_p = np.array([np.trace(d @ p).real for p in s.projectors])
            dot_p = born_probabilities(d, s).weights
            bary, _ = project_onto_simplex(encode(d, basis), s)
            worst = max(worst, np.max(np.abs(trace_p - dot_p)), np.max(np.abs(trace_p - bary.weights)))
        assert worst < 1e-12

    def test_probabilities_do_not_depend_on_basis_choice(self, rng):
        d = random_density(4, rng)
        a = random_observable(4, rng)
        perm = [int(p) for p in rng.permutation(15)]
        bases = [
            standard_basis(4),
            superposition_basis(4),
            standard_basis(4, random_unitary(4, rng).T),
            reorder(standard_basis(4), perm),
        ]
        probs = []
        for basis in bases:
            bary, _ = project_onto_simplex(encode(d, basis), simplex_from_observable(a, basis))
            probs.append(bary.weights)
        for p in probs[1:]:
            assert np.allclose(p, probs[0], atol=1e-10)

    def test_perpendicular_part_is_orthogonal(self, rng):
        basis = standard_basis(3)
        s = simplex_from_observable(random_observable(3, rng), basis)
        r = encode(random_density(3, rng), basis)
        _, r_perp = project_onto_simplex(r, s)
        v = s.vertex_matrix
        assert np.allclose((v[:-1] - v[-1]) @ r_perp.components, 0.0, atol=1e-12)
        assert np.allclose(parallel_component(r, s).components + r_perp.components, r.components)

    def test_immersion_path_endpoints(self, rng):
        basis = standard_basis(3)
        s = simplex_from_observable(random_observable(3, rng), basis)
        r = encode(random_density(3, rng), basis)
        assert np.allclose(immersion_path(r, s, 0.0).components, r.components)
        assert np.allclose(immersion_path(r, s, 1.0).components, parallel_component(r, s).components)
        with pytest.raises(WeightError):
            immersion_path(r, s, 1.5)

    def test_immersion_halves_then_removes_coherences(self):
        basis = standard_basis(2)
        s = simplex_from_observable(SIGMA3, basis)
        d = qubit_from_spherical(1.0, math.pi / 3.0, 0.7).matrix
        r = encode(d, basis)
        half = decode(immersion_path(r, s, 0.5))
        done = decode(immersion_path(r, s, 1.0))
        assert half[0, 1] == pytest.approx(d[0, 1] / 2.0, abs=1e-12)
        assert abs(done[0, 1]) < 1e-12 and abs(done[1, 0]) < 1e-12
        assert np.allclose(np.diag(half), np.diag(d), atol=1e-12)
        assert np.allclose(np.diag(done), np.diag(d), atol=1e-12)

    @pytest.mark.parametrize(
        "theta", [0.0, 0.4, math.pi / 2.0, 2.5, math.pi], ids=["pole", "t04", "equator", "t25", "antipole"]
    )
    def test_qubit_weights_follow_polar_angle(self, theta):
        basis = standard_basis(2)
        s = simplex_from_observable(SIGMA3, basis)
        bary, _ = project_onto_simplex(encode(qubit_from_spherical(1.0, theta, 1.1), basis), s)
        want = [math.sin(theta / 2.0) ** 2, math.cos(theta / 2.0) ** 2]
        assert np.allclose(bary.weights, want, atol=1e-12)


class TestSubRegions:
    def test_segment_rule(self, rng):
        w = BarycentricCoords([0.3, 0.7])
        lam = sample_uniform_simplex(2, 10_000, rng)
        geometric = np.where(lam[:, 0] < w.weights[0], 0, 1)
        assert np.array_equal(classify(lam, w), geometric)

    def test_triangle_rule(self, rng):
        w = BarycentricCoords([0.2, 0.5, 0.3])
        verts = vertex_coordinates_2d()
        center = w.weights @ verts
        lam = sample_uniform_simplex(3, 10_000, rng)
        pts = lam @ verts
        total = shoelace_area(verts)
        got = classify(lam, w)
        disagreements = 0
        for p, k in zip(pts, got):
            inside = []
            for i in range(3):
                j, m = [x for x in range(3) if x != i]
                tri = [center, verts[j], verts[m]]
                parts = shoelace_area([p, tri[1], tri[2]]) + shoelace_area([tri[0], p, tri[2]]) + shoelace_area(
                    [tri[0], tri[1], p]
                )
                inside.append(parts - shoelace_area(tri) < 1e-12 * total)
            if sum(inside) == 1 and not inside[k]:
                disagreements += 1
        assert disagreements == 0

    def test_subregion_areas_are_the_weights(self):
        w = BarycentricCoords([0.2, 0.5, 0.3])
        verts = vertex_coordinates_2d()
        center = w.weights @ verts
        total = shoelace_area(verts)
        for i in range(3):
            j, m = [x for x in range(3) if x != i]
            assert shoelace_area([center, verts[j], verts[m]]) / total == pytest.approx(w.weights[i], abs=1e-12)
            assert subregion_fraction(w, i) == pytest.approx(w.weights[i])
        assert subregion_fraction(w, 1, absolute=True) == pytest.approx(0.5 * 3.0 * math.sqrt(3.0) / 4.0)
        with pytest.raises(DimensionError):
            subregion_fraction(w, 3)

    def test_edge_fraction(self):
        assert edge_fraction(1.0, 2) == pytest.approx(0.5)
        assert edge_fraction(2.0 * e_constant(5), 5) == pytest.approx(1.0)

    def test_ties_and_zero_weights(self):
        assert classify(np.array([[0.5, 0.5]]), BarycentricCoords([0.5, 0.5]))[0] == 0
        assert classify(np.array([[0.0, 1.0]]), BarycentricCoords([0.0, 1.0]))[0] == 1


class TestMembraneSampling:
    @staticmethod
    def _within_band(w, seed, shots=1_000_000):
        counts = sample_counts(w, worker_rng(seed), shots)
        freq = counts / shots
        band = three_sigma(w.weights, shots)
        return bool(np.all(np.abs(freq - w.weights) <= band + 1e-15))

    @pytest.mark.parametrize("n", [2, 3, 4], ids=["N2", "N3", "N4"])
    def test_frequencies_match_born_weights(self, n):
        targets = np.random.default_rng(1000 + n).dirichlet(np.ones(n), size=20)
        for k, p in enumerate(targets):
            w = BarycentricCoords(p / p.sum())
            # two strikes: a single 3-sigma excursion is retried on a fresh seed
            assert self._within_band(w, 7919 * n + k) or self._within_band(w, 104729 + 7919 * n + k)

    def test_chisquare_goodness_of_fit(self):
        w = BarycentricCoords([0.1, 0.2, 0.3, 0.4])
        shots = 200_000
        counts = sample_counts(w, worker_rng(5), shots)
        assert chisquare(counts, f_exp=w.weights * shots).pvalue > 1e-4

    def test_chisquare_over_repeated_runs(self, rng):
        # 100 runs of 10^5 shots; at the 0.001 level about one failure is expected
        s = simplex_from_observable(random_observable(3, rng), standard_basis(3))
        d = OperatorState(random_density(3, rng))
        shots = 100_000
        passed = 0
        for k in range(100):
            run = run_measurement(d, s, shots, worker_rng(31337, k))
            passed += chisquare(run.counts, f_exp=run.probabilities * shots).pvalue > 1e-3
        assert passed >= 97

    def test_single_draw_is_reproducible(self):
        w = BarycentricCoords([0.25, 0.75])
        a = sample_membrane(w, worker_rng(11))
        b = sample_membrane(w, worker_rng(11))
        assert a.outcome_index == b.outcome_index
        assert np.array_equal(a.lambda_bary, b.lambda_bary)
        assert a.lambda_bary.sum() == pytest.approx(1.0)


class TestRuns:
    def test_eigenstate_always_gives_its_outcome(self, rng):
        s = simplex_from_observable(SIGMA3, standard_basis(2))
        run = run_measurement(OperatorState(UP), s, 10_000, rng)
        assert run.counts.tolist() == [0, 10_000]
        assert run.frequencies[1] == 1.0
        assert np.allclose(run.collapsed[1].matrix, UP)

    def test_first_kind_repeatability(self, rng):
        s = simplex_from_observable(random_observable(3, rng), standard_basis(3))
        run = run_measurement(OperatorState(random_density(3, rng)), s, 50, rng)
        for k, collapsed in enumerate(run.collapsed):
            assert all(repeat_measurement(collapsed, s, rng) == k for _ in range(20))

    def test_parallel_runs_are_deterministic(self):
        s = simplex_from_observable(np.diag([0.0, 1.0, 2.0]), standard_basis(3))
        d = OperatorState(np.diag([0.2, 0.3, 0.5]))
        a = run_measurement_parallel(d, s, 100_001, seed=99, workers=4)
        b = run_measurement_parallel(d, s, 100_001, seed=99, workers=4)
        assert np.array_equal(a.counts, b.counts)
        assert a.shots == 100_001
        assert np.allclose(a.probabilities, [0.2, 0.3, 0.5])

    def test_shots_must_be_positive(self, rng):
        s = simplex_from_observable(SIGMA3, standard_basis(2))
        with pytest.raises(BlochError, match="shots") as exc:
            run_measurement(OperatorState(UP), s, 0, rng)
        assert not isinstance(exc.value, WeightError)


class TestBarycentricCoords:
    def test_clamps_roundoff_negatives(self):
        w = BarycentricCoords([-1e-12, 1.0 + 1e-12])
        assert w.weights[0] == 0.0

    @pytest.mark.parametrize("bad", [[-0.1, 1.1], [0.5, 0.6]], ids=["negative", "sum"])
    def test_rejects_invalid_weights(self, bad):
        with pytest.raises(WeightError):
            BarycentricCoords(bad)
