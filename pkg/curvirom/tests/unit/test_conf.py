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

from curvirom import conf
from curvirom import exceptions
from curvirom.tests.unit import utils


class ParseConfigTextTest(utils.TestCase):

    def test_typed_values(self):
        values = conf.parse_config_text(
            "# a comment\n"
            "levels = 3\n"
            "fd_omega = 1.7   # trailing\n"
            "strict = true\n"
            "base_dims = '6x12'\n"
            "\n"
            "y2_bounds = [0, 30]\n"
            "left_mode = 320\n")
        self.assertEqual({'levels': 3, 'fd_omega': 1.7, 'strict': True,
                          'base_dims': '6x12', 'y2_bounds': (0.0, 30.0),
                          'left_mode': '320'},
                         values)

    def test_hash_inside_quotes(self):
        values = conf.parse_config_text('sweep_order = "eta-xi#1"')
        self.assertEqual('eta-xi#1', values['sweep_order'])

    def test_string_values_coerced(self):
        values = conf.parse_config_text('strict = "yes"\nlevels = "2"\n'
                                        'mesh_tol = 1e-6\nfd_omega = 2')
        self.assertEqual({'strict': True, 'levels': 2, 'mesh_tol': 1e-6,
                          'fd_omega': 2.0}, values)

    def test_per_level_thresholds(self):
        values = conf.parse_config_text('energy_threshold = [0.99, 0.9999]')
        self.assertEqual((0.99, 0.9999), values['energy_threshold'])

    def test_unknown_option(self):
        e = self.assertRaises(exceptions.CommandError,
                              conf.parse_config_text, 'colour = "blue"',
                              'run.conf')
        self.assertIn('run.conf', str(e))
        self.assertIn('colour', str(e))

    def test_tables_rejected(self):
        self.assertRaises(exceptions.CommandError, conf.parse_config_text,
                          '[mesh]\ntol = 1e-6')

    def test_not_toml(self):
        e = self.assertRaises(exceptions.CommandError,
                              conf.parse_config_text, 'levels 3', 'run.conf')
        self.assertIn('run.conf', str(e))

    def test_bad_values(self):
        for text in ('levels = many', 'levels = 3.5', 'levels = "x"',
                     'strict = "maybe"', 'fd_omega = true',
                     'x1_bounds = "100, 150"', 'x1_bounds = [100]',
                     'x1_bounds = [100, 120, 150]', 'mesh_tol = [1e-6]'):
            self.assertRaises(exceptions.CommandError,
                              conf.parse_config_text, text)


class ResolveTest(utils.TestCase):

    def setUp(self):
        super(ResolveTest, self).setUp()
        self.path = os.path.join(self.make_tempdir(), 'run.conf')
        with open(self.path, 'w') as f:
            f.write('levels = 3\nthreads = 2\nseed = 5\n')

    def test_defaults(self):
        config = conf.resolve(command='mesh')
        self.assertEqual(4, config.levels)
        self.assertEqual((8, 32), config.base)
        self.assertEqual('mesh', config.command)
        self.assertEqual((100.0, 150.0), config.bounds['x1'])

    def test_file_over_defaults(self):
        config = conf.resolve(config_file=self.path)
        self.assertEqual(3, config.levels)
        self.assertEqual(5, config.seed)

    def test_env_over_file(self):
        self.useFixture(fixtures.EnvironmentVariable(conf.THREADS_ENV, '6'))
        config = conf.resolve(config_file=self.path)
        self.assertEqual(6, config.threads)

    def test_overrides_win(self):
        self.useFixture(fixtures.EnvironmentVariable(conf.THREADS_ENV, '6'))
        config = conf.resolve(config_file=self.path,
                              overrides={'threads': 3, 'seed': None})
        self.assertEqual(3, config.threads)
        self.assertEqual(5, config.seed)

    def test_unknown_override(self):
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'colour': 'blue'})

    def test_missing_file(self):
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          config_file=self.path + '.missing')

    def test_invalid_mode(self):
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'mode': 'both'})

    def test_base_too_small(self):
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'base_dims': '2x8'})

    def test_bad_bounds(self):
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'x1_bounds': '150'})
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'x1_bounds': (150, 100)})

    def test_bounds_from_file(self):
        with open(self.path, 'a') as f:
            f.write('y4_bounds = [25, 60.5]\n')
        config = conf.resolve(config_file=self.path)
        self.assertEqual((25.0, 60.5), config.bounds['y4'])
        self.assertEqual((100.0, 150.0), config.bounds['x1'])

    def test_overrides_coerced(self):
        config = conf.resolve(overrides={'levels': '2', 'strict': 'true'})
        self.assertEqual(2, config.levels)
        self.assertIs(True, config.strict)
        self.assertRaises(exceptions.CommandError, conf.resolve,
                          overrides={'levels': 'two'})


class RunConfigTest(utils.TestCase):

    def test_derived_options(self):
        config = self.make_config(mesh_tol=1e-6, fd_omega=1.6,
                                  left_mode='310')
        self.assertEqual(1e-6, config.mesh_options()['tol'])
        self.assertEqual('eta-xi', config.mesh_options()['sweep_order'])
        self.assertEqual(1.6, config.solve_options()['omega'])
        self.assertEqual(310.0, config.boundary_conditions().left_mode)

    def test_replace(self):
        config = self.make_config()
        changed = config.replace(levels=2)
        self.assertEqual(2, changed.levels)
        self.assertEqual(4, config.levels)
        self.assertRaises(exceptions.CommandError, config.replace,
                          colour='blue')

    def test_unknown_attribute(self):
        self.assertRaises(AttributeError, getattr, self.make_config(),
                          'colour')

    def test_log_config(self):
        logger = self.useFixture(fixtures.FakeLogger(level='INFO'))
        conf.log_config(self.make_config())
        self.assertIn('levels=4', logger.output)
