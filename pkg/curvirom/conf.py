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

"""
Run configuration.

Values are resolved in the order: built-in defaults, config file,
environment (``CURVIROM_THREADS``), command-line flags.  A config file is
a TOML document of top-level options::

    # finer meshes, fewer samples
    levels = 3
    base_dims = "8x32"
    left_mode = 320.0
    y4_bounds = [25, 60]
"""

import collections
import dataclasses
import logging

from oslo_utils import strutils

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from curvirom import exceptions
from curvirom import geometry
from curvirom.i18n import _
from curvirom.i18n import _LI
from curvirom import thermal_fd
from curvirom import utils

LOG = logging.getLogger(__name__)

THREADS_ENV = 'CURVIROM_THREADS'

MODES = ('multi', 'single')

# options that also take one value per hierarchy level
PER_LEVEL = ('energy_threshold',)

DEFAULTS = collections.OrderedDict([
    # mesh generation
    ('mesh_tol', 1e-8),
    ('mesh_max_iter', 50000),
    ('mesh_omega', 1.5),
    ('sweep_order', 'eta-xi'),
    # finite-difference temperature solve
    ('fd_tol', 1e-9),
    ('fd_max_iter', 200000),
    ('fd_omega', 1.8),
    ('top_value', 350.0),
    ('bottom_value', 300.0),
    ('left_mode', 'blend'),
    ('right_mode', 'blend'),
    # hierarchy and surrogate
    ('levels', 4),
    ('base_dims', '8x32'),
    ('mode', 'multi'),
    ('energy_threshold', 0.9999),
    ('gp_budget', 800),
    ('gp_restarts', 8),
    # dataset
    ('n_samples', 300),
    ('train_fraction', 0.7),
    ('max_failure_rate', 0.01),
    ('seed', 0),
    ('strict', False),
    ('threads', 1),
    # geometry bounds, [lower, upper] in mm
    ('x1_bounds', (100.0, 150.0)),
    ('y1_bounds', (10.0, 16.0)),
    ('y2_bounds', (0.0, 30.0)),
    ('y3_bounds', (20.0, 50.0)),
    ('y4_bounds', (25.0, 75.0)),
])


def _float(value):
    if isinstance(value, bool):
        raise ValueError(value)
    return float(value)


def _coerce(key, value):
    default = DEFAULTS[key]
    try:
        if isinstance(default, tuple):
            if isinstance(value, (str, bytes)):
                raise ValueError(value)
            pair = tuple(float(v) for v in value)
            if len(pair) != 2:
                raise ValueError(value)
            return pair
        if isinstance(default, bool):
            return strutils.bool_from_string(value, strict=True)
        if isinstance(default, int):
            if not strutils.is_int_like(value):
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            if key in PER_LEVEL and isinstance(value, (list, tuple)):
                return tuple(_float(v) for v in value)
            return _float(value)
    except (TypeError, ValueError):
        raise exceptions.CommandError(
            _("Invalid value %(value)r for option '%(key)s'.") % {
                'value': value, 'key': key})
    return str(value)


def parse_config_text(text, source='<string>'):
    """Parse a TOML document of top-level options into typed values."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise exceptions.CommandError(
            _("%(src)s: %(err)s") % {'src': source, 'err': e})
    values = {}
    for key, value in data.items():
        if key not in DEFAULTS:
            raise exceptions.CommandError(
                _("%(src)s: unknown option '%(key)s'") % {
                    'src': source, 'key': key})
        values[key] = _coerce(key, value)
    return values


def load_config_file(path):
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except (IOError, OSError) as e:
        raise exceptions.CommandError(
            _("Cannot read config file '%(path)s': %(err)s") % {
                'path': path, 'err': e})
    return parse_config_text(text, source=path)


@dataclasses.dataclass(frozen=True)
class RunConfig(object):
    """Fully resolved settings of one command."""

    values: dict
    command: str = None
    config_file: str = None

    def __getattr__(self, name):
        try:
            return self.__dict__['values'][name]
        except KeyError:
            raise AttributeError(name)

    @property
    def base(self):
        return utils.parse_dims(self.values['base_dims'])

    @property
    def bounds(self):
        return geometry.check_bounds(collections.OrderedDict(
            (name, self.values[name + '_bounds'])
            for name in geometry.PARAM_NAMES))

    def boundary_conditions(self):
        return thermal_fd.BoundaryConditions.from_config(self)

    def mesh_options(self):
        return {'tol': self.mesh_tol, 'max_iter': self.mesh_max_iter,
                'omega': self.mesh_omega, 'sweep_order': self.sweep_order}

    def solve_options(self):
        return {'tol': self.fd_tol, 'max_iter': self.fd_max_iter,
                'omega': self.fd_omega}

    def replace(self, **overrides):
        values = dict(self.values)
        for key, value in overrides.items():
            if key not in DEFAULTS:
                raise exceptions.CommandError(
                    _("Unknown option '%s'") % key)
            values[key] = _coerce(key, value)
        return RunConfig(values=values, command=self.command,
                         config_file=self.config_file)

    def to_dict(self):
        data = collections.OrderedDict(sorted(self.values.items()))
        data['command'] = self.command
        data['config_file'] = self.config_file
        return data

    def validate(self):
        if self.mode not in MODES:
            raise exceptions.CommandError(
                _("Mode must be one of %(modes)s, got '%(mode)s'") % {
                    'modes': utils.pretty_choice_list(MODES),
                    'mode': self.mode})
        if self.levels < 1:
            raise exceptions.CommandError(_("levels must be at least 1"))
        if self.threads < 1:
            raise exceptions.CommandError(_("threads must be at least 1"))
        if min(self.base) < 3:
            raise exceptions.CommandError(
                _("base_dims must be at least 3x3"))
        try:
            self.bounds
        except exceptions.InputDomainError as e:
            raise exceptions.CommandError(e.message)
        return self


def resolve(config_file=None, overrides=None, command=None):
    """Build the :class:`RunConfig` for a command.

    :param overrides: values given explicitly on the command line; ``None``
                      entries are ignored.
    """
    values = dict(DEFAULTS)
    if config_file:
        values.update(load_config_file(config_file))
    threads = utils.env(THREADS_ENV)
    if threads:
        values['threads'] = _coerce('threads', threads)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in DEFAULTS:
            raise exceptions.CommandError(_("Unknown option '%s'") % key)
        values[key] = _coerce(key, value)
    return RunConfig(values=values, command=command,
                     config_file=config_file).validate()


def log_config(config):
    LOG.info(_LI("Resolved configuration: %s"),
             ', '.join('%s=%s' % (k, v) for k, v in config.to_dict().items()))
