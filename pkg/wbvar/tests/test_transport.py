import math

from django.test import SimpleTestCase, override_settings

import numpy as np

from wbvar.distributions import GAUSSIAN, LocationScale
from wbvar.exceptions import ConvergenceError, DimensionMismatchError, DomainError, NotSPDError, SimplexError
from wbvar.transport import (
    FixedPointSolver,
    GaussianMeasureMV,
    WeightedEnsemble,
    as_simplex,
    barycenter_1d,
    barycenter_gaussian_mv,
    barycenter_quantile,
    check_spd,
    fixed_point_residual,
    quantile_grid,
    sqrtm_spd,
    w2_1d,
    w2_location_scale,
)


def gaussian(location, scale):
    return LocationScale(GAUSSIAN, location, scale)


def random_spd(rng, dim):
    a = rng.normal(size=(dim, dim))
    return a @ a.T + dim * np.eye(dim)


class SimplexTests(SimpleTestCase):

    def test_valid_weights_are_returned_read_only(self):
        weights = as_simplex([0.25, 0.75])
        np.testing.assert_array_equal(weights, [0.25, 0.75])
        self.assertFalse(weights.flags.writeable)

    def test_invalid_weights(self):
        for weights in ([0.7, 0.4], [1.2, -0.2], [], [float('nan'), 1.0]):
            with self.assertRaises(SimplexError):
                as_simplex(weights)
        with self.assertRaises(DimensionMismatchError):
            as_simplex([0.5, 0.5], size=3)


class OneDimensionalTests(SimpleTestCase):
    """Distances and barycenters on the real line."""

    def test_w2_reference_values(self):
        print("\n--- UNIT TEST: W2 distance on the real line ---")
        self.assertEqual(w2_1d(gaussian(0, 1), gaussian(0, 1)), 0.0)
        self.assertAlmostEqual(w2_1d(gaussian(0, 1), gaussian(3, 1)), 3.0, places=10)
        print("LOG: Pure translation gives the shift exactly.")
        self.assertAlmostEqual(w2_location_scale(gaussian(0, 1), gaussian(1, 2)), math.sqrt(2.0), places=12)

    def test_grid_distance_converges_to_closed_form(self):
        a, b = gaussian(0.0, 1.0), gaussian(1.0, 2.0)
        exact = w2_location_scale(a, b)
        coarse = abs(w2_1d(a, b, grid_size=100) - exact)
        fine = abs(w2_1d(a, b, grid_size=100000) - exact)
        self.assertLess(fine, coarse)
        self.assertAlmostEqual(w2_1d(a, b, grid_size=1000000), exact, places=3)

    def test_grid_is_interior_midpoints(self):
        np.testing.assert_allclose(quantile_grid(4), [0.125, 0.375, 0.625, 0.875])
        with self.assertRaises(DomainError):
            w2_1d(gaussian(0, 1), gaussian(0, 1), grid_size=1)

    def test_w2_is_symmetric_and_satisfies_triangle_inequality(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c = (gaussian(rng.normal(), rng.uniform(0.1, 3.0)) for _ in range(3))
            self.assertAlmostEqual(w2_location_scale(a, b), w2_location_scale(b, a), places=14)
            self.assertLessEqual(
                w2_location_scale(a, c), w2_location_scale(a, b) + w2_location_scale(b, c) + 1e-12,
            )

    def test_barycenter_averages_location_and_scale(self):
        print("\n--- UNIT TEST: 1D Gaussian barycenter ---")
        single = WeightedEnsemble.from_moments(GAUSSIAN, [0.3], [1.7], [1.0])
        self.assertEqual(barycenter_1d(single), gaussian(0.3, 1.7))

        bary = barycenter_1d(WeightedEnsemble.from_moments(GAUSSIAN, [0, 2], [1, 3]))
        self.assertAlmostEqual(bary.location, 1.0)
        self.assertAlmostEqual(bary.scale, 2.0)

        market = barycenter_1d(WeightedEnsemble.from_moments(GAUSSIAN, [0.00038, 0.00030], [0.01694, 0.01076]))
        self.assertAlmostEqual(market.location, 0.00034, places=12)
        self.assertAlmostEqual(market.scale, 0.01385, places=12)
        print(f"LOG: Market barycenter ({market.location}, {market.scale})")

    def test_barycenter_quantile_is_weighted_average_of_quantiles(self):
        ensemble = WeightedEnsemble.from_moments(GAUSSIAN, [0, 0], [1, 3])
        self.assertAlmostEqual(barycenter_quantile(ensemble, 0.975), 3.9199280, places=6)
        market = WeightedEnsemble.from_moments(GAUSSIAN, [0.00038, 0.00030], [0.01694, 0.01076])
        self.assertAlmostEqual(barycenter_quantile(market, 0.01), barycenter_1d(market).quantile_at(0.01), places=14)
        identical = WeightedEnsemble.from_moments(GAUSSIAN, [0.5, 0.5, 0.5], [2, 2, 2], [0.2, 0.3, 0.5])
        grid = quantile_grid(9)
        np.testing.assert_allclose(barycenter_quantile(identical, grid), gaussian(0.5, 2).quantile_at(grid))

    def test_barycenter_is_invariant_under_member_permutation(self):
        rng = np.random.default_rng(11)
        locations, scales = rng.normal(size=6), rng.uniform(0.5, 2.0, size=6)
        weights = rng.dirichlet(np.ones(6))
        order = rng.permutation(6)
        a = barycenter_1d(WeightedEnsemble.from_moments(GAUSSIAN, locations, scales, weights))
        b = barycenter_1d(WeightedEnsemble.from_moments(GAUSSIAN, locations[order], scales[order], weights[order]))
        self.assertEqual((a.location, a.scale), (b.location, b.scale))

    def test_grid_search_lands_next_to_the_barycenter(self):
        """The 400x400 grid minimizer of the weighted squared W2 is within one cell of barycenter_1d."""
        print("\n--- UNIT TEST: Barycenter against a brute-force grid ---")
        rng = np.random.default_rng(2024)
        for _ in range(20):
            locations, scales = rng.normal(size=2), rng.uniform(0.2, 2.0, size=2)
            ensemble = WeightedEnsemble.from_moments(GAUSSIAN, locations, scales, rng.dirichlet(np.ones(2)))
            bary = barycenter_1d(ensemble)
            pairs = list(zip(ensemble.weights, ensemble.members))

            def energy(location, scale):
                return sum(w * w2_location_scale(gaussian(location, scale), member) ** 2 for w, member in pairs)

            m_axis = np.linspace(locations.min() - 1.0, locations.max() + 1.0, 400)
            s_axis = np.linspace(0.1 * scales.min(), 2.0 * scales.max(), 400)
            # Squared same-family W2 splits into a location part and a scale part.
            m_part = np.array([energy(m, s_axis[0]) for m in m_axis])
            s_part = np.array([energy(m_axis[0], s) for s in s_axis])
            grid = m_part[:, None] + s_part[None, :] - energy(m_axis[0], s_axis[0])

            i, k = np.unravel_index(np.argmin(grid), grid.shape)
            self.assertAlmostEqual(grid[i, k], energy(m_axis[i], s_axis[k]), places=10)
            self.assertLessEqual(energy(bary.location, bary.scale), grid[i, k] + 1e-12)
            self.assertLessEqual(abs(m_axis[i] - bary.location), m_axis[1] - m_axis[0])
            self.assertLessEqual(abs(s_axis[k] - bary.scale), s_axis[1] - s_axis[0])
        print("LOG: Grid minimizers matched on 20 ensembles.")

    def test_barycenter_lies_between_its_members(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            size = int(rng.integers(2, 6))
            locations, scales = rng.normal(size=size), rng.uniform(0.1, 3.0, size=size)
            bary = barycenter_1d(WeightedEnsemble.from_moments(GAUSSIAN, locations, scales, rng.dirichlet(np.ones(size))))
            self.assertTrue(locations.min() - 1e-12 <= bary.location <= locations.max() + 1e-12)
            self.assertTrue(scales.min() - 1e-12 <= bary.scale <= scales.max() + 1e-12)

    def test_all_weight_on_one_member_returns_that_member(self):
        ensemble = WeightedEnsemble.from_moments(GAUSSIAN, [0.1, -0.4, 2.0], [0.5, 1.5, 0.9], [0.0, 1.0, 0.0])
        self.assertEqual(barycenter_1d(ensemble), gaussian(-0.4, 1.5))

    def test_ensemble_validation(self):
        with self.assertRaises(SimplexError):
            WeightedEnsemble.from_moments(GAUSSIAN, [0, 1], [1, 1], [0.7, 0.4])
        with self.assertRaises(DimensionMismatchError):
            WeightedEnsemble.from_moments(GAUSSIAN, [0, 1], [1])
        with self.assertRaises(DomainError):
            WeightedEnsemble((), ())


class MatrixTests(SimpleTestCase):

    def test_square_root_examples(self):
        np.testing.assert_allclose(sqrtm_spd(np.eye(3)), np.eye(3), atol=1e-15)
        np.testing.assert_allclose(sqrtm_spd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
        root = sqrtm_spd([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(root, [[1.3660254, 0.3660254], [0.3660254, 1.3660254]], atol=1e-7)
        np.testing.assert_allclose(root @ root, [[2.0, 1.0], [1.0, 2.0]], atol=1e-13)

    def test_rejects_matrices_that_are_not_spd(self):
        for matrix in ([[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.5], [0.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]):
            with self.assertRaises(NotSPDError):
                check_spd(matrix)
        with self.assertRaises(DimensionMismatchError):
            check_spd(np.ones((2, 3)))

    def test_measure_dimensions_must_agree(self):
        with self.assertRaises(DimensionMismatchError):
            GaussianMeasureMV([0.0, 0.0, 0.0], np.eye(2))


class GaussianBarycenterTests(SimpleTestCase):
    """Fixed-point barycenter of multivariate Gaussian measures."""

    def test_identical_measures_are_their_own_barycenter(self):
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        measure = GaussianMeasureMV([1.0, -1.0], cov)
        bary, report = barycenter_gaussian_mv([measure, measure, measure], [0.2, 0.3, 0.5])
        np.testing.assert_allclose(bary.mean, [1.0, -1.0])
        np.testing.assert_allclose(bary.covariance, cov, atol=1e-12)
        self.assertEqual(report.iterations, 0)
        self.assertLess(report.residual, 1e-12)

    def test_commuting_covariances(self):
        print("\n--- UNIT TEST: Commuting Gaussian barycenter ---")
        measures = [GaussianMeasureMV([0.0, 2.0], np.diag([1.0, 4.0])), GaussianMeasureMV([2.0, 0.0], np.diag([9.0, 16.0]))]
        for solver in FixedPointSolver:
            bary, report = barycenter_gaussian_mv(measures, [0.5, 0.5], tol=1e-12, solver=solver)
            np.testing.assert_allclose(bary.covariance, np.diag([4.0, 9.0]), atol=1e-11)
            np.testing.assert_allclose(bary.mean, [1.0, 1.0])
            self.assertLess(report.residual, 1e-12)
            print(f"LOG: {solver.value} converged in {report.iterations} iterations.")

    def test_one_dimensional_case_matches_closed_form(self):
        measures = [GaussianMeasureMV([0.00038], [[0.01694 ** 2]]), GaussianMeasureMV([0.00030], [[0.01076 ** 2]])]
        bary, _ = barycenter_gaussian_mv(measures, [0.5, 0.5], tol=1e-14)
        self.assertAlmostEqual(bary.covariance[0, 0], 0.01385 ** 2, places=14)
        self.assertAlmostEqual(bary.mean[0], 0.00034, places=14)

    def test_random_ensembles_reach_the_fixed_point(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            dim = int(rng.integers(2, 5))
            size = int(rng.integers(2, 5))
            covs = [random_spd(rng, dim) for _ in range(size)]
            weights = rng.dirichlet(np.ones(size))
            measures = [GaussianMeasureMV(rng.normal(size=dim), c) for c in covs]
            bary, report = barycenter_gaussian_mv(measures, weights)
            self.assertLessEqual(report.residual, 1e-10)
            self.assertLessEqual(fixed_point_residual(bary.covariance, covs, weights), 1e-9)
            check_spd(bary.covariance)

    def test_substitution_agrees_with_interpolation(self):
        rng = np.random.default_rng(3)
        measures = [GaussianMeasureMV(np.zeros(3), random_spd(rng, 3)) for _ in range(3)]
        a, _ = barycenter_gaussian_mv(measures, [0.2, 0.3, 0.5], solver='interpolation')
        b, _ = barycenter_gaussian_mv(measures, [0.2, 0.3, 0.5], solver='substitution')
        np.testing.assert_allclose(a.covariance, b.covariance, atol=1e-9)

    def test_non_convergence_carries_the_last_iterate(self):
        rng = np.random.default_rng(5)
        measures = [GaussianMeasureMV(np.zeros(3), random_spd(rng, 3)) for _ in range(2)]
        with self.assertRaises(ConvergenceError) as ctx:
            barycenter_gaussian_mv(measures, [0.5, 0.5], max_iter=0)
        report = ctx.exception.report
        self.assertEqual(report.iterations, 0)
        self.assertGreater(report.residual, 1e-10)
        self.assertEqual(report.solution.shape, (3, 3))

    @override_settings(RISK_ENGINE={'FIXED_POINT_TOL': 1e-3, 'FIXED_POINT_MAX_ITER': 100})
    def test_defaults_come_from_settings(self):
        rng = np.random.default_rng(8)
        measures = [GaussianMeasureMV(np.zeros(2), random_spd(rng, 2)) for _ in range(2)]
        _, loose = barycenter_gaussian_mv(measures, [0.5, 0.5])
        _, tight = barycenter_gaussian_mv(measures, [0.5, 0.5], tol=1e-11)
        self.assertLessEqual(loose.residual, 1e-3)
        self.assertLessEqual(loose.iterations, tight.iterations)

    def test_invalid_arguments(self):
        measures = [GaussianMeasureMV(np.zeros(2), np.eye(2)), GaussianMeasureMV(np.zeros(3), np.eye(3))]
        with self.assertRaises(DimensionMismatchError):
            barycenter_gaussian_mv(measures, [0.5, 0.5])
        with self.assertRaises(SimplexError):
            barycenter_gaussian_mv(measures[:1] * 2, [0.7, 0.4])
        with self.assertRaises(DomainError):
            barycenter_gaussian_mv(measures[:1], [1.0], tol=0.0)
