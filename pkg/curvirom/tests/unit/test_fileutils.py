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

import numpy as np

from curvirom import exceptions
from curvirom import fileutils
from curvirom.tests.unit import fakes
from curvirom.tests.unit import utils


class ArrayFileTest(utils.TestCase):

    def setUp(self):
        super(ArrayFileTest, self).setUp()
        self.path = os.path.join(self.make_tempdir(), 'field.bin')

    def test_layout(self):
        fileutils.write_array(self.path, np.arange(6.0).reshape(2, 3))
        with open(self.path, 'rb') as f:
            raw = f.read()
        # ndim, two extents, six doubles
        self.assertEqual(4 + 2 * 8 + 6 * 8, len(raw))
        self.assertEqual(b'\x02\x00\x00\x00', raw[:4])
        self.assertEqual((3).to_bytes(8, 'little'), raw[12:20])

    def test_truncated(self):
        fileutils.write_array(self.path, np.ones((3, 3)))
        with open(self.path, 'rb') as f:
            raw = f.read()
        with open(self.path, 'wb') as f:
            f.write(raw[:-1])
        e = self.assertRaises(exceptions.LoadError, fileutils.read_array,
                              self.path)
        self.assertIn('payload', str(e))

    def test_missing(self):
        self.assertRaises(exceptions.LoadError, fileutils.read_array,
                          self.path)


class JsonFileTest(utils.TestCase):

    def test_version_checked(self):
        path = os.path.join(self.make_tempdir(), 'm.json')
        fileutils.write_json(path, {'version': 99})
        self.assertRaises(exceptions.LoadError, fileutils.read_json, path)
        self.assertEqual({'version': 99},
                         fileutils.read_json(path, expect_version=False))

    def test_not_json(self):
        path = os.path.join(self.make_tempdir(), 'm.json')
        with open(path, 'w') as f:
            f.write('{nope')
        self.assertRaises(exceptions.LoadError, fileutils.read_json, path)


class ExportTest(utils.TestCase):

    def setUp(self):
        super(ExportTest, self).setUp()
        self.dir = self.make_tempdir()
        self.mesh = fakes.rect_mesh(3, 4)
        self.temperature = np.arange(12.0).reshape(3, 4)

    def test_vtk(self):
        path = os.path.join(self.dir, 'mesh.vtk')
        fileutils.export_mesh(path, self.mesh.x, self.mesh.y,
                              {'temperature': self.temperature})
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual('DATASET STRUCTURED_GRID', lines[3])
        self.assertEqual('DIMENSIONS 4 3 1', lines[4])
        self.assertEqual('POINTS 12 double', lines[5])
        self.assertEqual('2 1 0', lines[6])
        self.assertIn('POINT_DATA 12', lines)
        self.assertIn('SCALARS temperature double 1', lines)
        self.assertEqual('11', lines[-1])

    def test_csv(self):
        path = os.path.join(self.dir, 'mesh.csv')
        fileutils.export_mesh(path, self.mesh.x, self.mesh.y,
                              {'temperature': self.temperature})
        table = np.loadtxt(path, delimiter=',', skiprows=1)
        self.assertEqual((12, 5), table.shape)
        with open(path) as f:
            self.assertEqual('i,j,x,y,temperature', f.readline().strip())
        self.assertEqual([2.0, 3.0, -2.0, -1.0, 11.0], list(table[-1]))

    def test_unknown_extension(self):
        self.assertRaises(exceptions.CommandError, fileutils.export_mesh,
                          os.path.join(self.dir, 'mesh.obj'), self.mesh.x,
                          self.mesh.y)

    def test_scalar_shape(self):
        self.assertRaises(exceptions.DataError, fileutils.export_mesh,
                          os.path.join(self.dir, 'mesh.vtk'), self.mesh.x,
                          self.mesh.y, {'t': np.zeros((2, 2))})

    def test_rows_csv(self):
        path = os.path.join(self.dir, 'rows.csv')
        fileutils.write_rows_csv(path, [{'mode': 'multi', 'mae': 0.5}],
                                 ['mode', 'mae'])
        with open(path) as f:
            self.assertEqual('mode,mae\nmulti,0.5\n', f.read())

    def test_rows_csv_quoting_and_missing_keys(self):
        path = os.path.join(self.dir, 'rows.csv')
        rows = [{'name': 'a, b', 'mre': np.float64(0.1), 'extra': 1},
                {'name': 'c', 'size': np.int64(3)}]
        fileutils.write_rows_csv(path, rows, ['name', 'size', 'mre'])
        with open(path) as f:
            self.assertEqual('name,size,mre\n"a, b",,0.1\nc,3,\n', f.read())


class BundleTest(utils.TestCase):

    def test_round_trip(self):
        path = os.path.join(self.make_tempdir(), 'bundle')
        mesh = fakes.rect_mesh(3, 5)
        fileutils.save_bundle(path, mesh.x, mesh.y,
                              {'temperature': mesh.x + 300.0},
                              meta={'command': 'solve'})
        x, y, scalars, meta = fileutils.load_bundle(path)
        self.assertTrue(np.array_equal(mesh.x, x))
        self.assertTrue(np.array_equal(mesh.y, y))
        self.assertEqual(['temperature'], list(scalars))
        self.assertEqual({'command': 'solve'}, meta)

    def test_shape_mismatch(self):
        path = os.path.join(self.make_tempdir(), 'bundle')
        mesh = fakes.rect_mesh(3, 5)
        fileutils.save_bundle(path, mesh.x, mesh.y)
        fileutils.write_array(os.path.join(path, 'mesh-y.bin'),
                              np.zeros((5, 3)))
        self.assertRaises(exceptions.LoadError, fileutils.load_bundle, path)
