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

import numpy as np

from curvirom import stencils
from curvirom.tests.unit import fakes
from curvirom.tests.unit import utils


class MetricTest(utils.TestCase):

    def setUp(self):
        super(MetricTest, self).setUp()
        # unit spacing in both directions
        self.mesh = fakes.rect_mesh(5, 7, half_width=3.0, half_height=2.0)

    def test_cartesian_metrics(self):
        alpha, beta, gamma = stencils.metric_fields(self.mesh.x, self.mesh.y)
        self.assertEqual((3, 5), alpha.shape)
        self.assertAllClose(np.ones((3, 5)), alpha)
        self.assertAllClose(np.zeros((3, 5)), beta, atol=1e-15)
        self.assertAllClose(np.ones((3, 5)), gamma)

    def test_jacobian_positive(self):
        jac = stencils.jacobian_field(self.mesh.x, self.mesh.y)
        self.assertAllClose(np.ones((3, 5)), jac)

    def test_operator_annihilates_bilinear(self):
        alpha, beta, gamma = stencils.metric_fields(self.mesh.x, self.mesh.y)
        u = 2.0 * self.mesh.x - self.mesh.y + 0.5 * self.mesh.x * self.mesh.y
        res = stencils.apply_operator(u, alpha, beta, gamma)
        self.assertAllClose(np.zeros_like(res), res, atol=1e-12)

    def test_mean_abs_empty(self):
        self.assertEqual(0.0, stencils.mean_abs(np.zeros((0, 3))))


class SweepTest(utils.TestCase):

    def _linear_problem(self):
        u = np.zeros((6, 8))
        u[0, :] = 1.0
        u[:, 0] = np.linspace(1.0, 0.0, 6)
        u[:, -1] = np.linspace(1.0, 0.0, 6)
        ones = np.ones((4, 6))
        return u, ones, np.zeros((4, 6)), ones

    def test_sor_converges_to_linear_profile(self):
        u, alpha, beta, gamma = self._linear_problem()
        for _i in range(500):
            if stencils.sor_sweep(u, alpha, beta, gamma, 1.5,
                                  stencils.ORDER_ETA_XI) < 1e-13:
                break
        expected = np.tile(np.linspace(1.0, 0.0, 6)[:, None], (1, 8))
        self.assertAllClose(expected, u, atol=1e-10)

    def test_sweep_orders_agree_at_convergence(self):
        results = []
        for order in (stencils.ORDER_ETA_XI, stencils.ORDER_XI_ETA):
            u, alpha, beta, gamma = self._linear_problem()
            for _i in range(500):
                stencils.sor_sweep(u, alpha, beta, gamma, 1.2, order)
            results.append(u)
        self.assertAllClose(results[0], results[1], atol=1e-10)

    def test_sweep_leaves_boundary(self):
        u, alpha, beta, gamma = self._linear_problem()
        before = u.copy()
        stencils.sor_sweep(u, alpha, beta, gamma, 1.5, stencils.ORDER_ETA_XI)
        self.assertTrue(np.array_equal(before[0], u[0]))
        self.assertTrue(np.array_equal(before[-1], u[-1]))
        self.assertTrue(np.array_equal(before[:, 0], u[:, 0]))
        self.assertTrue(np.array_equal(before[:, -1], u[:, -1]))

    def test_mesh_sweep_keeps_uniform_grid(self):
        mesh = fakes.rect_mesh(5, 7)
        x, y = np.array(mesh.x), np.array(mesh.y)
        change = stencils.mesh_sweep(x, y, 1.5, stencils.ORDER_ETA_XI)
        self.assertLess(change, 1e-12)
        self.assertAllClose(mesh.x, x, atol=1e-12)
