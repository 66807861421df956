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

from concurrent import futures
import contextlib
import os
import re
import time

import numpy as np
from oslo_utils import encodeutils
import prettytable

from curvirom import exceptions
from curvirom.i18n import _


DIMS_REGEX = re.compile(r"^\s*(\d+)\s*[xX,]\s*(\d+)\s*$")


def env(*args, **kwargs):
    """Returns the first environment variable set.

    If all are empty, defaults to '' or keyword arg `default`.
    """
    for arg in args:
        value = os.environ.get(arg)
        if value:
            return value
    return kwargs.get('default', '')


def arg(*args, **kwargs):
    """Decorator for CLI args.

    Example:

    >>> @arg("params", help="Geometry parameters")
    ... def do_mesh(conf, args):
    ...     pass
    """
    def _decorator(func):
        add_arg(func, *args, **kwargs)
        return func
    return _decorator


def add_arg(func, *args, **kwargs):
    """Bind CLI arguments to a commands.py `do_foo` function."""

    if not hasattr(func, 'arguments'):
        func.arguments = []

    # NOTE(sirp): avoid dups that can occur when the module is shared across
    # tests.
    if (args, kwargs) not in func.arguments:
        # Because of the semantics of decorator composition if we just append
        # to the options list positional options will appear to be backwards.
        func.arguments.insert(0, (args, kwargs))


def pretty_choice_list(choices):
    return ', '.join("'%s'" % i for i in choices)


def _render(table):
    return encodeutils.safe_decode(encodeutils.safe_encode(table.get_string()))


def print_list(objs, fields, formatters=None, sortby_index=None):
    """Print a table with one row per object.

    Objects may be mappings or plain objects; a field is looked up as a key
    first, then as the lower-cased, underscored attribute name.
    """
    formatters = formatters or {}
    pt = prettytable.PrettyTable([f for f in fields])
    pt.align = 'l'

    for o in objs:
        row = []
        for field in fields:
            if field in formatters:
                row.append(formatters[field](o))
                continue
            if hasattr(o, 'keys'):
                data = o.get(field, '')
            else:
                data = getattr(o, field.lower().replace(' ', '_'), '')
            if data is None:
                data = '-'
            row.append(format_value(data))
        pt.add_row(row)

    if sortby_index is not None:
        pt.sortby = fields[sortby_index]
    print(_render(pt))


def print_dict(d, dict_property="Property", dict_value="Value"):
    pt = prettytable.PrettyTable([dict_property, dict_value])
    pt.align = 'l'
    for k, v in sorted(d.items()):
        if v is None:
            v = '-'
        pt.add_row([k, format_value(v)])
    print(_render(pt))


def format_value(value):
    """Render numbers compactly for tables."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '%.6g' % value
    if isinstance(value, (list, tuple)):
        return 'x'.join(format_value(v) for v in value)
    return str(value).replace("\r", "")


def parse_dims(text):
    """Parse ``'8x32'`` into ``(8, 32)``."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise exceptions.CommandError(
                _("Dimensions need two entries, got %s") % (text,))
        return int(text[0]), int(text[1])
    match = DIMS_REGEX.match(str(text))
    if not match:
        raise exceptions.CommandError(
            _("Invalid dimensions '%s'; expected HxW, e.g. 8x32.") % text)
    return int(match.group(1)), int(match.group(2))


def child_seed(seed, index):
    """Deterministic per-item seed, independent of scheduling order."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path


@contextlib.contextmanager
def record_time(times, enabled, *args):
    """Record the time of a specific action.

    :param times: A list of tuples holds time data.
    :type times: list
    :param enabled: Whether timing is enabled.
    :type enabled: bool
    :param *args: Other data to be stored besides time data, these args
                  will be joined to a string.
    """
    if not enabled:
        yield
    else:
        start = time.time()
        yield
        end = time.time()
        times.append((' '.join(args), start, end))


def run_tasks(func, tasks, workers=1):
    """``[func(t) for t in tasks]``, optionally on a process pool.

    Results keep the order of ``tasks`` whatever the worker count.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with futures.ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks, chunksize=chunksize))
