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

import os

import fixtures
import mock
import numpy as np

from curvirom import dataset
from curvirom import exceptions
from curvirom import geometry
from curvirom import multilevel
from curvirom.tests.unit import fakes
from curvirom.tests.unit import utils


class LhsSampleTest(utils.TestCase):

    def test_one_point_per_stratum(self):
        n = 10
        points = np.array([p.normalized() for p in dataset.lhs_sample(n)])
        self.assertEqual((n, len(geometry.PARAM_NAMES)), points.shape)
        for column in points.T:
            strata = np.minimum(np.floor(column * n), n - 1).astype(int)
            self.assertEqual(list(range(n)), sorted(strata))

    def test_inside_bounds(self):
        bounds = geometry.DEFAULT_BOUNDS
        for params in dataset.lhs_sample(20, seed=4):
            self.assertEqual([], params.out_of_range(bounds))

    def test_deterministic(self):
        a = dataset.lhs_sample(5, seed=9)
        b = dataset.lhs_sample(5, seed=9)
        self.assertEqual([p.to_dict() for p in a], [p.to_dict() for p in b])
        c = dataset.lhs_sample(5, seed=10)
        self.assertNotEqual([p.to_dict() for p in a],
                            [p.to_dict() for p in c])

    def test_no_samples(self):
        self.assertRaises(exceptions.InputDomainError, dataset.lhs_sample, 0)


class SplitTest(utils.TestCase):

    def setUp(self):
        super(SplitTest, self).setUp()
        self.data = fakes.make_dataset(10)

    def _ids(self, part):
        return [s.sample_id for s in part.samples]

    def test_sizes_and_disjoint(self):
        train, test = dataset.split(self.data, 0.7, seed=2)
        self.assertEqual(7, len(train))
        self.assertEqual(3, len(test))
        self.assertEqual(set(), set(self._ids(train)) & set(self._ids(test)))
        self.assertEqual(7, train.manifest['count'])

    def test_deterministic(self):
        a, _b = dataset.split(self.data, 0.5, seed=3)
        c, _d = dataset.split(self.data, 0.5, seed=3)
        self.assertEqual(self._ids(a), self._ids(c))

    def test_bad_fraction(self):
        self.assertRaises(exceptions.InputDomainError, dataset.split,
                          self.data, 1.0)
        self.assertRaises(exceptions.InputDomainError, dataset.split,
                          self.data, 0.01)


class DatasetTest(utils.TestCase):

    def test_level_mismatch(self):
        sample = fakes.make_sample(0, fakes.PARAMS)
        self.assertRaises(exceptions.DataError, dataset.Dataset,
                          samples=[sample],
                          manifest=fakes.make_manifest(1, levels=3))

    def test_truth_is_finest_solution(self):
        sample = fakes.make_sample(0, fakes.PARAMS)
        self.assertEqual((10, 18), sample.truth.shape)
        self.assertEqual(1, sample.truth.level)


class GenerateTest(utils.TestCase):

    def setUp(self):
        super(GenerateTest, self).setUp()
        self.logger = self.useFixture(fixtures.FakeLogger())
        self.params = dataset.lhs_sample(4, seed=1)

    def _flaky(self, bad):
        def build(sample_id, params, config):
            index = int(sample_id.split('-')[1])
            if index in bad:
                raise exceptions.MeshFoldingError(jacobian_min=-0.5)
            return fakes.make_sample(index, params)
        return build

    def test_failures_excluded(self):
        config = self.make_config(levels=2, base_dims='5x9',
                                  max_failure_rate=0.5)
        with mock.patch.object(dataset, 'build_sample',
                               side_effect=self._flaky({1})):
            data = dataset.generate(self.params, config)
        self.assertEqual(3, len(data))
        self.assertEqual(4, data.manifest['requested'])
        self.assertEqual([1], [e['index'] for e in data.manifest['excluded']])
        self.assertIn('MeshFoldingError', data.manifest['excluded'][0][
            'error'])
        self.assertIn('Excluding sample 1', self.logger.output)

    def test_too_many_failures(self):
        config = self.make_config(levels=2, base_dims='5x9',
                                  max_failure_rate=0.01)
        with mock.patch.object(dataset, 'build_sample',
                               side_effect=self._flaky({0, 2})):
            self.assertRaises(exceptions.DataError, dataset.generate,
                              self.params, config)

    def test_no_geometries(self):
        self.assertRaises(exceptions.InputDomainError, dataset.generate, [],
                          self.make_config())

    def test_real_samples(self):
        config = self.make_config(levels=2, base_dims='5x9', mesh_tol=1e-6,
                                  fd_tol=1e-8, n_samples=2, seed=6)
        data = dataset.generate_lhs(config)
        self.assertEqual(2, len(data))
        self.assertEqual([(5, 9), (10, 18)], data.dims)
        self.assertEqual({'n': 2, 'seed': 6}, data.manifest['lhs'])
        for sample in data.samples:
            self.assertEqual((10, 18), sample.mesh.shape)
            self.assertAllClose(
                sample.truth.values,
                multilevel.recompose(sample.decomposition()).values,
                rtol=1e-10)
        regenerated = dataset.regenerate_params(data.manifest)
        self.assertEqual([s.params.to_dict() for s in data.samples],
                         [p.to_dict() for p in regenerated])

    def test_worker_count_does_not_change_results(self):
        params = dataset.lhs_sample(3, seed=2)
        serial, pooled = [
            dataset.generate(params, self.make_config(
                levels=2, base_dims='5x9', mesh_tol=1e-6, fd_tol=1e-8,
                threads=threads))
            for threads in (1, 2)]
        self.assertEqual([s.sample_id for s in serial.samples],
                         [s.sample_id for s in pooled.samples])
        for a, b in zip(serial.samples, pooled.samples):
            self.assertEqual(a.params.to_dict(), b.params.to_dict())
            self.assertAllClose(a.truth.values, b.truth.values,
                                rtol=0.0, atol=1e-12)


class PersistenceTest(utils.TestCase):

    def test_save_load(self):
        path = os.path.join(self.make_tempdir(), 'data')
        data = fakes.make_dataset(3)
        dataset.save(data, path)
        self.assertTrue(os.path.isfile(os.path.join(path, dataset.MANIFEST)))
        loaded = dataset.load(path)
        self.assertEqual(3, len(loaded))
        self.assertEqual(data.dims, loaded.dims)
        for before, after in zip(data.samples, loaded.samples):
            self.assertEqual(before.sample_id, after.sample_id)
            self.assertEqual(before.params, after.params)
            self.assertEqual(before.mesh, after.mesh)
            self.assertEqual(list(before.solutions), list(after.solutions))
            self.assertEqual(list(before.tilde_v), list(after.tilde_v))

    def test_truncated_sample(self):
        path = self.make_tempdir()
        dataset.save(fakes.make_dataset(2), path)
        victim = os.path.join(path, dataset.SAMPLES_DIR, 'sample-00001',
                              'solution-1.bin')
        with open(victim, 'rb') as f:
            raw = f.read()
        with open(victim, 'wb') as f:
            f.write(raw[:-8])
        self.assertRaises(exceptions.LoadError, dataset.load, path)

    def test_missing_manifest(self):
        self.assertRaises(exceptions.LoadError, dataset.load,
                          self.make_tempdir())
