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
Subcommands of the ``curvirom`` shell.

Every ``do_<name>`` function becomes the ``<name>`` subcommand (underscores
turn into hyphens) and is called with a :class:`Context` and the parsed
arguments.
"""

from __future__ import print_function

import logging
import os

from oslo_serialization import jsonutils

from curvirom import conf
from curvirom import dataset
from curvirom import exceptions
from curvirom import fileutils
from curvirom import geometry
from curvirom.i18n import _
from curvirom import meshgen
from curvirom import multilevel
from curvirom import surrogate
from curvirom import thermal_fd
from curvirom import utils

LOG = logging.getLogger(__name__)

SPLIT_FILE = 'split.json'


class Context(object):
    """What every subcommand gets besides its arguments."""

    def __init__(self, config, out_dir='.', timings=False, overrides=None):
        self.config = config
        self.out_dir = out_dir
        self.timings = timings
        self.overrides = overrides or {}
        self.times = []

    def timed(self, *label):
        return utils.record_time(self.times, self.timings, *label)

    def out_path(self, *parts):
        utils.ensure_dir(self.out_dir)
        return os.path.join(self.out_dir, *parts)

    def write_config(self):
        fileutils.write_json(self.out_path('config.json'),
                             dict(self.config.to_dict(),
                                  version=fileutils.FORMAT_VERSION))


def _parse_params(text):
    """Geometry from ``x1,y1,y2,y3,y4`` or a JSON file holding those keys."""
    if os.path.isfile(text):
        try:
            with open(text) as f:
                data = jsonutils.loads(f.read())
        except ValueError as e:
            raise exceptions.CommandError(
                _("Cannot parse parameter file '%(path)s': %(err)s") % {
                    'path': text, 'err': e})
        return geometry.GeometryParams.from_dict(data)
    try:
        values = [float(v) for v in text.split(',')]
    except ValueError:
        raise exceptions.CommandError(
            _("Parameters must be 'x1,y1,y2,y3,y4' or a JSON file, got "
              "'%s'") % text)
    if len(values) != len(geometry.PARAM_NAMES):
        raise exceptions.CommandError(
            _("Expected %(n)d parameters, got %(got)d") % {
                'n': len(geometry.PARAM_NAMES), 'got': len(values)})
    return geometry.GeometryParams(*values)


def _finest_dims(config, dims=None):
    if dims:
        return utils.parse_dims(dims)
    return multilevel.level_dims(config.base, config.levels)[-1]


def _mesh(ctx, params, dims):
    config = ctx.config
    params.validate(config.bounds, strict=config.strict)
    with ctx.timed('mesh', 'x'.join(map(str, dims))):
        return meshgen.generate_mesh(params, dims[0], dims[1],
                                     bounds=config.bounds,
                                     strict=config.strict,
                                     **config.mesh_options())


def _output(ctx, args, default):
    return args.output or ctx.out_path(default)


def _load_dataset(ctx, path):
    with ctx.timed('load', 'dataset'):
        return dataset.load(path)


def _split(ctx, data):
    config = ctx.config
    train, test = dataset.split(data, config.train_fraction, config.seed)
    return train, test


def _dataset_config(ctx, data):
    """The run config with the hierarchy taken from a dataset manifest."""
    config = ctx.config
    if 'levels' not in ctx.overrides:
        config = config.replace(levels=data.levels)
    if 'base_dims' not in ctx.overrides:
        config = config.replace(
            base_dims='%dx%d' % tuple(data.manifest['base_dims']))
    return config


def _print_rows(rows, fields):
    utils.print_list(rows, fields)


@utils.arg(
    'params',
    metavar='<x1,y1,y2,y3,y4|file>',
    help=_("Geometry parameters in mm, or a JSON file with keys "
           "x1, y1, y2, y3, y4."))
@utils.arg(
    '--dims',
    metavar='<HxW>',
    default=None,
    help=_("Node counts (eta x xi). Defaults to the finest hierarchy "
           "level."))
@utils.arg(
    '--output',
    metavar='<file>',
    default=None,
    help=_("Export file, .vtk or .csv. Defaults to <out>/mesh.vtk."))
def do_mesh(ctx, args):
    """Generate a body-fitted mesh and report its quality."""
    params = _parse_params(args.params)
    dims = _finest_dims(ctx.config, args.dims)
    mesh = _mesh(ctx, params, dims)
    output = _output(ctx, args, 'mesh.vtk')
    fileutils.export_mesh(output, mesh.x, mesh.y)
    fileutils.save_bundle(ctx.out_path('mesh'), mesh.x, mesh.y,
                          meta={'params': params.to_dict()})
    ctx.write_config()
    quality = meshgen.mesh_quality(mesh)
    quality['output'] = output
    utils.print_dict(quality)


@utils.arg(
    'params',
    metavar='<x1,y1,y2,y3,y4|file>',
    help=_("Geometry parameters in mm, or a JSON file with keys "
           "x1, y1, y2, y3, y4."))
@utils.arg(
    '--dims',
    metavar='<HxW>',
    default=None,
    help=_("Node counts (eta x xi). Defaults to the finest hierarchy "
           "level."))
@utils.arg(
    '--output',
    metavar='<file>',
    default=None,
    help=_("Export file, .vtk or .csv. Defaults to "
           "<out>/temperature.vtk."))
def do_solve(ctx, args):
    """Solve the finite-difference temperature field on a relaxed mesh."""
    config = ctx.config
    params = _parse_params(args.params)
    dims = _finest_dims(config, args.dims)
    mesh = _mesh(ctx, params, dims)
    with ctx.timed('solve', 'x'.join(map(str, dims))):
        field = thermal_fd.solve_laplace(
            mesh, config.boundary_conditions(), **config.solve_options())
    output = _output(ctx, args, 'temperature.vtk')
    fileutils.export_mesh(output, mesh.x, mesh.y,
                          {'temperature': field.values})
    fileutils.save_bundle(ctx.out_path('solution'), mesh.x, mesh.y,
                          {'temperature': field.values},
                          meta={'params': params.to_dict()})
    ctx.write_config()
    utils.print_dict({
        'dims': mesh.shape,
        'residual': thermal_fd.field_residual(mesh, field),
        'T_min': float(field.values.min()),
        'T_max': float(field.values.max()),
        'output': output,
    })


@utils.arg(
    '--samples',
    metavar='<count>',
    type=int,
    default=None,
    help=_("Number of Latin-hypercube geometries. Defaults to the "
           "n_samples option."))
@utils.arg(
    '--dataset',
    metavar='<dir>',
    default=None,
    help=_("Dataset directory. Defaults to <out>/dataset."))
def do_generate_dataset(ctx, args):
    """Sample geometries and generate multi-level ground truth."""
    config = ctx.config
    path = args.dataset or ctx.out_path('dataset')
    with ctx.timed('generate', 'dataset'):
        data = dataset.generate_lhs(config, args.samples)
    with ctx.timed('save', 'dataset'):
        dataset.save(data, path)
    ctx.write_config()
    utils.print_dict({
        'samples': len(data),
        'excluded': len(data.manifest['excluded']),
        'levels': data.levels,
        'dims': ', '.join('x'.join(map(str, d)) for d in data.dims),
        'path': path,
    })


@utils.arg(
    '--dataset',
    metavar='<dir>',
    required=True,
    help=_("Dataset directory written by generate-dataset."))
@utils.arg(
    '--surrogate',
    metavar='<dir>',
    default=None,
    help=_("Output directory. Defaults to <out>/surrogate."))
@utils.arg(
    '--no-split',
    action='store_true',
    default=False,
    help=_("Train on every sample instead of the train fraction."))
def do_train(ctx, args):
    """Train the thermal surrogate on a dataset."""
    data = _load_dataset(ctx, args.dataset)
    config = _dataset_config(ctx, data)
    if args.no_split:
        train, test = data, None
    else:
        train, test = _split(ctx, data)
    with ctx.timed('train', config.mode):
        model = surrogate.train_thermal(train, config)
    path = args.surrogate or ctx.out_path('surrogate')
    surrogate.save_surrogate(model, path)
    fileutils.write_json(os.path.join(path, SPLIT_FILE), {
        'version': fileutils.FORMAT_VERSION,
        'dataset': os.path.abspath(args.dataset),
        'train': [s.sample_id for s in train.samples],
        'test': [] if test is None else [s.sample_id for s in test.samples],
    })
    ctx.write_config()
    _print_rows(model.describe(), ['level', 'dims', 'modes', 'energy'])
    utils.print_dict({'surrogate_id': model.surrogate_id,
                      'mode': model.mode,
                      'train_samples': len(train),
                      'path': path})


@utils.arg(
    'params',
    metavar='<x1,y1,y2,y3,y4|file>',
    help=_("Geometry parameters in mm, or a JSON file with keys "
           "x1, y1, y2, y3, y4."))
@utils.arg(
    '--surrogate',
    metavar='<dir>',
    required=True,
    help=_("Surrogate directory written by train."))
@utils.arg(
    '--output',
    metavar='<file>',
    default=None,
    help=_("Export file, .vtk or .csv. Defaults to <out>/prediction.vtk."))
def do_predict(ctx, args):
    """Predict the mesh and temperature field of a geometry."""
    params = _parse_params(args.params)
    model = surrogate.load_surrogate(args.surrogate)
    with ctx.timed('predict', model.mode):
        prediction = surrogate.predict_combined(
            model, params, ctx.config.mesh_options())
    field = prediction.field
    scalars = {'temperature': field.values, 'variance': field.variance}
    output = _output(ctx, args, 'prediction.vtk')
    fileutils.export_mesh(output, prediction.mesh.x, prediction.mesh.y,
                          scalars)
    fileutils.save_bundle(ctx.out_path('prediction'), prediction.mesh.x,
                          prediction.mesh.y, scalars,
                          meta=prediction.provenance)
    ctx.write_config()
    utils.print_dict({
        'surrogate_id': model.surrogate_id,
        'mode': model.mode,
        'out_of_range': field.out_of_range,
        'outside': ', '.join(field.outside) or None,
        'T_min': float(field.values.min()),
        'T_max': float(field.values.max()),
        'output': output,
    })


def _test_set(data, surrogate_dir, use_all):
    if use_all:
        return data
    split_path = os.path.join(surrogate_dir, SPLIT_FILE)
    if not os.path.exists(split_path):
        return data
    wanted = set(fileutils.read_json(split_path)['test'])
    if not wanted:
        return data
    indices = [i for i, s in enumerate(data.samples) if s.sample_id in wanted]
    if not indices:
        raise exceptions.CommandError(
            _("None of the held-out samples in %s are in this dataset; use "
              "--all to evaluate every sample.") % split_path)
    return data.subset(indices)


def _report(ctx, report, name):
    fileutils.write_rows_csv(ctx.out_path(name + '.csv'), report.per_sample,
                             ['sample', 'mae', 'mre', 'max_abs'])
    fileutils.write_json(ctx.out_path(name + '.json'), {
        'version': fileutils.FORMAT_VERSION,
        'mae': report.mae,
        'mre': report.mre,
        'samples': len(report.per_sample),
        'metrics': surrogate.METRIC_DEFINITIONS,
    })


@utils.arg(
    '--surrogate',
    metavar='<dir>',
    required=True,
    help=_("Surrogate directory written by train."))
@utils.arg(
    '--dataset',
    metavar='<dir>',
    required=True,
    help=_("Dataset with finite-difference truth."))
@utils.arg(
    '--all',
    dest='use_all',
    action='store_true',
    default=False,
    help=_("Evaluate every sample, not only those held out at training."))
def do_evaluate(ctx, args):
    """Compare surrogate predictions with finite-difference truth.

    MRE is the per-sample mean absolute error divided by the range of the
    true field, averaged over samples.
    """
    data = _load_dataset(ctx, args.dataset)
    test = _test_set(data, args.surrogate, args.use_all)
    model = surrogate.load_surrogate(args.surrogate)
    with ctx.timed('evaluate', model.mode):
        report = surrogate.evaluate(model, test)
    _report(ctx, report, 'evaluation')
    ctx.write_config()
    print(_("MAE: %.4f K") % report.mae)
    print(_("MRE: %.4f %%") % (100.0 * report.mre))
    utils.print_dict({'samples': len(test), 'mode': model.mode,
                      'breakdown': ctx.out_path('evaluation.csv')})


@utils.arg(
    'bundle',
    metavar='<dir>',
    help=_("Bundle directory written by mesh, solve or predict."))
@utils.arg(
    'output',
    metavar='<file>',
    help=_("Export file, .vtk or .csv."))
def do_export(ctx, args):
    """Re-export a saved mesh, solution or prediction."""
    x, y, scalars, meta = fileutils.load_bundle(args.bundle)
    fileutils.export_mesh(args.output, x, y, scalars)
    utils.print_dict({'dims': x.shape,
                      'fields': ', '.join(sorted(scalars)) or None,
                      'output': args.output})


@utils.arg(
    '--dataset',
    metavar='<dir>',
    required=True,
    help=_("Dataset directory written by generate-dataset."))
def do_compare_modes(ctx, args):
    """Test accuracy of multi-level against single-level surrogates."""
    data = _load_dataset(ctx, args.dataset)
    config = _dataset_config(ctx, data)
    train, test = _split(ctx, data)
    with ctx.timed('compare', 'modes'):
        rows = surrogate.compare_modes(train, test, config)
    for row in rows:
        row['mre_percent'] = 100.0 * row['mre']
    fileutils.write_rows_csv(ctx.out_path('compare-modes.csv'), rows,
                             ['mode', 'mae', 'mre'])
    ctx.write_config()
    _print_rows(rows, ['mode', 'mae', 'mre_percent'])


@utils.arg(
    '--dataset',
    metavar='<dir>',
    required=True,
    help=_("Dataset directory written by generate-dataset."))
@utils.arg(
    '--sizes',
    metavar='<n,n,...>',
    required=True,
    help=_("Comma-separated training-set sizes."))
def do_size_study(ctx, args):
    """Test accuracy as a function of the training-set size."""
    try:
        sizes = [int(s) for s in args.sizes.split(',') if s.strip()]
    except ValueError:
        raise exceptions.CommandError(
            _("Sizes must be integers, got '%s'") % args.sizes)
    data = _load_dataset(ctx, args.dataset)
    config = _dataset_config(ctx, data)
    train, test = _split(ctx, data)
    with ctx.timed('size', 'study'):
        rows = surrogate.dataset_size_study(train, test, sizes, config)
    for row in rows:
        row['mre_percent'] = 100.0 * row['mre']
    fileutils.write_rows_csv(ctx.out_path('size-study.csv'), rows,
                             ['size', 'mae', 'mre'])
    ctx.write_config()
    _print_rows(rows, ['size', 'mae', 'mre_percent'])


@utils.arg(
    '--all-options',
    dest='all_options',
    action='store_true',
    default=False,
    help=_("Also show options still at their default."))
def do_show_config(ctx, args):
    """Print the resolved run configuration."""
    values = ctx.config.to_dict()
    if not args.all_options:
        values = dict((k, v) for k, v in values.items()
                      if conf.DEFAULTS.get(k) != v)
    for key, value in values.items():
        # arrays print in the config-file spelling, not as dims
        if isinstance(value, tuple):
            values[key] = '[%s]' % ', '.join(utils.format_value(v)
                                            for v in value)
    utils.print_dict(values)
