#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

import mock
import numpy as np

from curvirom import exceptions
from curvirom import meshgen
from curvirom import multilevel
from curvirom import thermal_fd
from curvirom.tests.unit import fakes
from curvirom.tests.unit import utils


def _bilinear(dims):
    n_eta, n_xi = dims
    u = np.linspace(0.0, 1.0, n_eta)[:, None]
    v = np.linspace(0.0, 1.0, n_xi)[None, :]
    return 2.0 + 3.0 * u - v + 4.0 * u * v


class LevelDimsTest(utils.TestCase):

    def test_doubling(self):
        self.assertEqual([(4, 8), (8, 16), (16, 32)],
                         multilevel.level_dims((4, 8), 3))

    def test_no_levels(self):
        self.assertRaises(exceptions.InputDomainError,
                          multilevel.level_dims, (4, 8), 0)

    def test_base_too_small(self):
        self.assertRaises(exceptions.InputDomainError,
                          multilevel.level_dims, (2, 8), 2)


class ProlongateTest(utils.TestCase):

    def test_interpolation_rows_sum_to_one(self):
        matrix = multilevel.interpolation_matrix(5, 10)
        self.assertAllClose(np.ones(10), matrix.sum(axis=1))
        self.assertTrue(np.all(matrix >= 0.0))

    def test_same_size_is_identity(self):
        self.assertTrue(np.array_equal(np.eye(4),
                                       multilevel.interpolation_matrix(4, 4)))

    def test_bilinear_exact(self):
        coarse = thermal_fd.ScalarField(_bilinear((5, 9)), level=3)
        fine = multilevel.prolongate(coarse, (10, 18))
        self.assertAllClose(_bilinear((10, 18)), fine.values, rtol=1e-12)
        self.assertEqual(3, fine.level)

    def test_corners_exact(self):
        values = np.random.default_rng(1).normal(size=(4, 6))
        fine = multilevel.prolongate(values, (8, 12)).values
        self.assertEqual(values[0, 0], fine[0, 0])
        self.assertEqual(values[-1, -1], fine[-1, -1])
        self.assertEqual(values[0, -1], fine[0, -1])

    def test_two_by_two_centre(self):
        fine = multilevel.prolongate(np.array([[0.0, 1.0], [2.0, 3.0]]),
                                     (3, 3)).values
        self.assertEqual(1.5, fine[1, 1])
        self.assertAllClose([[0.0, 0.5, 1.0], [1.0, 1.5, 2.0],
                             [2.0, 2.5, 3.0]], fine, atol=1e-15)

    def test_constant_preserved(self):
        fine = multilevel.prolongate(np.full((4, 6), 7.25), (8, 12)).values
        self.assertAllClose(np.full((8, 12), 7.25), fine, atol=1e-12)

    def test_linear_in_field(self):
        rng = np.random.default_rng(3)
        f, g = rng.normal(size=(2, 4, 6))
        combined = multilevel.prolongate(2.5 * f - 0.5 * g, (7, 11)).values
        separate = (2.5 * multilevel.prolongate(f, (7, 11)).values -
                    0.5 * multilevel.prolongate(g, (7, 11)).values)
        self.assertAllClose(separate, combined, rtol=0.0, atol=1e-12)

    def test_cannot_shrink(self):
        self.assertRaises(exceptions.InputDomainError,
                          multilevel.prolongate, np.zeros((8, 8)), (4, 16))


class DecompositionTest(utils.TestCase):

    def setUp(self):
        super(DecompositionTest, self).setUp()
        rng = np.random.default_rng(7)
        self.dims = multilevel.level_dims((4, 6), 3)
        self.solutions = [
            thermal_fd.ScalarField(300.0 + rng.normal(size=d), level=l)
            for l, d in enumerate(self.dims)]

    def test_recompose_recovers_finest(self):
        dec = multilevel.decompose(self.solutions)
        self.assertEqual(3, dec.L)
        self.assertEqual(self.dims, dec.dims)
        self.assertAllClose(self.solutions[-1].values,
                            multilevel.recompose(dec).values, rtol=0.0,
                            atol=1e-12)

    def test_first_part_is_coarsest_solution(self):
        dec = multilevel.decompose(self.solutions)
        self.assertEqual(self.solutions[0], dec.tilde_v[0])

    def test_two_level_toy(self):
        dec = multilevel.decompose([
            thermal_fd.ScalarField(np.zeros((2, 2)), level=0),
            thermal_fd.ScalarField(np.ones((3, 3)), level=1)])
        self.assertTrue(np.array_equal(np.zeros((2, 2)),
                                       dec.tilde_v[0].values))
        self.assertTrue(np.array_equal(np.ones((3, 3)),
                                       dec.tilde_v[1].values))
        self.assertTrue(np.array_equal(np.ones((3, 3)),
                                       multilevel.recompose(dec).values))

    def test_prolongated_levels_collapse(self):
        coarse = self.solutions[0]
        chain = [coarse] + [multilevel.prolongate(coarse, d)
                            for d in self.dims[1:]]
        dec = multilevel.decompose(chain)
        for part in dec.tilde_v[1:]:
            self.assertAllClose(np.zeros(part.shape), part.values,
                                atol=1e-12)

    def test_zero_parts_recompose_to_zero(self):
        dec = multilevel.LevelDecomposition(tilde_v=[
            thermal_fd.ScalarField(np.zeros(d), level=l)
            for l, d in enumerate(self.dims)])
        self.assertTrue(np.array_equal(np.zeros(self.dims[-1]),
                                       multilevel.recompose(dec).values))

    def test_single_level(self):
        dec = multilevel.decompose(self.solutions[:1])
        self.assertEqual(self.solutions[0],
                         multilevel.recompose(dec))

    def test_hierarchy_mismatch(self):
        hierarchy = multilevel.MeshHierarchy(
            [fakes.rect_mesh(*d) for d in multilevel.level_dims((5, 5), 3)])
        self.assertRaises(exceptions.DataError, multilevel.decompose,
                          self.solutions, hierarchy)

    def test_shrinking_chain(self):
        self.assertRaises(exceptions.DataError, multilevel.decompose,
                          list(reversed(self.solutions)))

    def test_empty(self):
        self.assertRaises(exceptions.DataError, multilevel.decompose, [])


class HierarchyTest(utils.TestCase):

    def test_build_and_solve(self):
        hierarchy = multilevel.build_hierarchy(fakes.PARAMS, 2, (5, 9),
                                               tol=1e-6)
        self.assertEqual(2, hierarchy.L)
        self.assertEqual([(5, 9), (10, 18)], hierarchy.dims)
        self.assertIs(hierarchy.levels[-1], hierarchy.finest)

        solutions = multilevel.solve_levels(hierarchy, tol=1e-8)
        self.assertEqual([0, 1], [s.level for s in solutions])
        dec = multilevel.decompose(solutions, hierarchy)
        self.assertAllClose(solutions[-1].values,
                            multilevel.recompose(dec).values, rtol=1e-12)

    def test_level_failure_is_wrapped(self):
        with mock.patch.object(
                meshgen, 'generate_mesh',
                side_effect=[fakes.rect_mesh(5, 9),
                             exceptions.MeshFoldingError(
                                 jacobian_min=-1.0)]):
            e = self.assertRaises(exceptions.LevelError,
                                  multilevel.build_hierarchy, fakes.PARAMS,
                                  2, (5, 9))
        self.assertEqual(1, e.level)
        self.assertIsInstance(e.__cause__, exceptions.MeshFoldingError)
