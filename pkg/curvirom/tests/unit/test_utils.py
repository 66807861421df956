#
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

import io
import sys

import fixtures
import mock
import numpy as np

from curvirom import exceptions
from curvirom.tests.unit import utils as test_utils
from curvirom import utils


class _FakeResult(object):
    def __init__(self, name, value):
        self.name = name
        self.value = value


class PrintResultTestCase(test_utils.TestCase):
    @mock.patch('sys.stdout', io.StringIO())
    def test_print_dict(self):
        dict = {'key': 'value', 'dims': (8, 32)}
        utils.print_dict(dict)
        self.assertEqual('+----------+-------+\n'
                         '| Property | Value |\n'
                         '+----------+-------+\n'
                         '| dims     | 8x32  |\n'
                         '| key      | value |\n'
                         '+----------+-------+\n',
                         sys.stdout.getvalue())

    @mock.patch('sys.stdout', io.StringIO())
    def test_print_list_sort_by_str(self):
        objs = [_FakeResult("k1", 1),
                _FakeResult("k3", 2),
                _FakeResult("k2", 3)]

        utils.print_list(objs, ["Name", "Value"], sortby_index=0)

        self.assertEqual('+------+-------+\n'
                         '| Name | Value |\n'
                         '+------+-------+\n'
                         '| k1   | 1     |\n'
                         '| k2   | 3     |\n'
                         '| k3   | 2     |\n'
                         '+------+-------+\n',
                         sys.stdout.getvalue())

    @mock.patch('sys.stdout', io.StringIO())
    def test_print_list_of_mappings(self):
        rows = [{'level': 0, 'energy': 0.99999123}]
        utils.print_list(rows, ['level', 'energy'])
        self.assertEqual('+-------+----------+\n'
                         '| level | energy   |\n'
                         '+-------+----------+\n'
                         '| 0     | 0.999991 |\n'
                         '+-------+----------+\n',
                         sys.stdout.getvalue())

    @mock.patch('sys.stdout', io.StringIO())
    def test_print_list_none_value(self):
        utils.print_list([_FakeResult('k', None)], ["Name", "Value"])
        self.assertIn('| k    | -     |', sys.stdout.getvalue())


class FormatValueTestCase(test_utils.TestCase):

    def test_numbers(self):
        self.assertEqual('3', utils.format_value(np.int64(3)))
        self.assertEqual('0.125', utils.format_value(0.125))
        self.assertEqual('True', utils.format_value(np.bool_(True)))
        self.assertEqual('10x18', utils.format_value([10, 18]))


class ParseDimsTestCase(test_utils.TestCase):

    def test_text(self):
        self.assertEqual((8, 32), utils.parse_dims('8x32'))
        self.assertEqual((8, 32), utils.parse_dims(' 8 X 32 '))
        self.assertEqual((5, 9), utils.parse_dims('5,9'))

    def test_sequence(self):
        self.assertEqual((4, 6), utils.parse_dims([4, 6]))

    def test_invalid(self):
        self.assertRaises(exceptions.CommandError, utils.parse_dims, '8')
        self.assertRaises(exceptions.CommandError, utils.parse_dims,
                          [1, 2, 3])


class EnvTestCase(test_utils.TestCase):

    def test_first_set(self):
        self.useFixture(fixtures.EnvironmentVariable('CURVIROM_A'))
        self.useFixture(fixtures.EnvironmentVariable('CURVIROM_B', '7'))
        self.assertEqual('7', utils.env('CURVIROM_A', 'CURVIROM_B'))

    def test_default(self):
        self.useFixture(fixtures.EnvironmentVariable('CURVIROM_A'))
        self.assertEqual('x', utils.env('CURVIROM_A', default='x'))


class ChildSeedTestCase(test_utils.TestCase):

    def test_deterministic(self):
        self.assertEqual(utils.child_seed(3, 1), utils.child_seed(3, 1))

    def test_distinct(self):
        seeds = set(utils.child_seed(3, i) for i in range(50))
        self.assertEqual(50, len(seeds))
        self.assertNotEqual(utils.child_seed(3, 0), utils.child_seed(4, 0))


class RunTasksTestCase(test_utils.TestCase):

    def test_serial(self):
        self.assertEqual([3, 2, 1], utils.run_tasks(abs, [-3, 2, -1]))

    def test_pool_keeps_order(self):
        tasks = list(range(-20, 0))
        self.assertEqual([abs(t) for t in tasks],
                         utils.run_tasks(abs, tasks, workers=2))

    def test_empty(self):
        self.assertEqual([], utils.run_tasks(abs, [], workers=4))


class RecordTimeTestCase(test_utils.TestCase):

    def test_record_time(self):
        times = []

        with utils.record_time(times, True, 'a', 'b'):
            pass
        self.assertEqual(1, len(times))
        self.assertEqual(3, len(times[0]))
        self.assertEqual('a b', times[0][0])
        self.assertIsInstance(times[0][1], float)
        self.assertIsInstance(times[0][2], float)

        times = []
        with utils.record_time(times, False, 'x'):
            pass
        self.assertEqual(0, len(times))


class ArgDecoratorTestCase(test_utils.TestCase):

    def test_arguments_in_declaration_order(self):
        @utils.arg('first')
        @utils.arg('--second', default=1)
        def do_thing(ctx, args):
            pass

        self.assertEqual([(('first',), {}), (('--second',), {'default': 1})],
                         do_thing.arguments)
