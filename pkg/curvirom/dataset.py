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
Ground-truth datasets: sampled geometries with per-level temperature
solutions and their level decomposition.

On disk a dataset is one directory::

    manifest.json
    samples/<id>/solution-<l>.bin
    samples/<id>/tilde-<l>.bin
    samples/<id>/mesh-x.bin
    samples/<id>/mesh-y.bin
"""

import dataclasses
import logging
import os
import platform

import numpy as np
from oslo_utils import timeutils
from scipy.stats import qmc

from curvirom import exceptions
from curvirom import fileutils
from curvirom import geometry
from curvirom.i18n import _
from curvirom.i18n import _LI
from curvirom.i18n import _LW
from curvirom import meshgen
from curvirom import multilevel
from curvirom import thermal_fd
from curvirom import utils

LOG = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
SAMPLES_DIR = 'samples'


def lhs_sample(n, bounds=None, seed=0):
    """``n`` Latin-hypercube points over ``bounds``.

    Every dimension gets exactly one point in each of its ``n``
    equal-width strata.
    """
    if int(n) < 1:
        raise exceptions.InputDomainError(
            reason=_("sample count must be at least 1, got %s") % n)
    bounds = geometry.check_bounds(
        geometry.DEFAULT_BOUNDS if bounds is None else bounds)
    lower = [bounds[name][0] for name in geometry.PARAM_NAMES]
    upper = [bounds[name][1] for name in geometry.PARAM_NAMES]
    sampler = qmc.LatinHypercube(d=len(geometry.PARAM_NAMES), seed=int(seed))
    points = qmc.scale(sampler.random(n=int(n)), lower, upper)
    return [geometry.GeometryParams.from_array(p) for p in points]


@dataclasses.dataclass(frozen=True, eq=False)
class Sample(object):
    """One geometry with its per-level solutions and decomposition."""

    sample_id: str
    params: geometry.GeometryParams
    solutions: tuple
    tilde_v: tuple
    mesh: meshgen.StructuredMesh

    @property
    def truth(self):
        return self.solutions[-1]

    def decomposition(self):
        return multilevel.LevelDecomposition(tilde_v=self.tilde_v)


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset(object):
    samples: tuple
    manifest: dict

    def __post_init__(self):
        object.__setattr__(self, 'samples', tuple(self.samples))
        levels = self.manifest.get('levels')
        for sample in self.samples:
            if levels is not None and (len(sample.solutions) != levels or
                                       len(sample.tilde_v) != levels):
                raise exceptions.DataError(
                    reason=_("sample %(id)s has %(got)d levels, manifest "
                             "says %(want)d") % {
                        'id': sample.sample_id,
                        'got': len(sample.solutions), 'want': levels})

    def __len__(self):
        return len(self.samples)

    @property
    def levels(self):
        return self.manifest['levels']

    @property
    def dims(self):
        return [tuple(d) for d in self.manifest['dims']]

    def params_array(self):
        return np.array([s.params.as_array() for s in self.samples])

    def subset(self, indices):
        """A dataset holding the selected samples, manifest preserved."""
        indices = [int(i) for i in indices]
        manifest = dict(self.manifest)
        manifest['count'] = len(indices)
        return Dataset(samples=[self.samples[i] for i in indices],
                       manifest=manifest)


def _base_manifest(config, dims):
    return {
        'version': fileutils.FORMAT_VERSION,
        'levels': config.levels,
        'base_dims': list(config.base),
        'dims': [list(d) for d in dims],
        'bounds': {k: list(v) for k, v in config.bounds.items()},
        'bc': config.boundary_conditions().to_dict(),
        'mesh': config.mesh_options(),
        'solver': config.solve_options(),
        'strict': config.strict,
        'seed': config.seed,
    }


def build_sample(sample_id, params, config):
    """Mesh hierarchy, level solves and decomposition for one geometry."""
    hierarchy = multilevel.build_hierarchy(
        params, config.levels, config.base, bounds=config.bounds,
        strict=config.strict, **config.mesh_options())
    solutions = multilevel.solve_levels(
        hierarchy, config.boundary_conditions(), **config.solve_options())
    dec = multilevel.decompose(solutions, hierarchy)
    return Sample(sample_id=sample_id, params=params,
                  solutions=tuple(solutions), tilde_v=dec.tilde_v,
                  mesh=hierarchy.finest)


def _sample_task(task):
    index, params, config = task
    try:
        return index, build_sample('sample-%05d' % index, params, config), \
            None
    except exceptions.CurviromException as e:
        return index, None, '%s: %s' % (e.__class__.__name__, e)


def generate(params_list, config, lhs=None):
    """Ground truth for every geometry in ``params_list``.

    Failing samples are dropped and listed in the manifest; more than
    ``config.max_failure_rate`` of them fails the whole run.

    :param lhs: the ``{'n', 'seed'}`` record of the sampling call, stored
                so the parameter list can be regenerated.
    """
    params_list = list(params_list)
    if not params_list:
        raise exceptions.InputDomainError(reason=_("no geometries given"))
    dims = multilevel.level_dims(config.base, config.levels)
    workers = max(1, int(config.threads))
    tasks = [(i, p, config) for i, p in enumerate(params_list)]
    LOG.info(_LI("Generating %(n)d samples on %(levels)d levels with "
                 "%(workers)d worker(s)"),
             {'n': len(tasks), 'levels': config.levels, 'workers': workers})

    samples, excluded = [], []
    results = utils.run_tasks(_sample_task, tasks, workers)
    for index, sample, error in results:
        if sample is not None:
            samples.append(sample)
            continue
        params = params_list[index]
        LOG.warning(_LW("Excluding sample %(index)d %(params)s: %(error)s"),
                    {'index': index, 'params': dict(params.to_dict()),
                     'error': error})
        excluded.append({'index': index, 'params': params.to_dict(),
                         'error': error})

    rate = len(excluded) / float(len(params_list))
    if rate > config.max_failure_rate:
        raise exceptions.DataError(
            reason=_("%(bad)d of %(n)d samples failed (%(rate).1f%%), above "
                     "the allowed %(max).1f%%") % {
                'bad': len(excluded), 'n': len(params_list),
                'rate': 100.0 * rate, 'max': 100.0 * config.max_failure_rate})

    manifest = _base_manifest(config, dims)
    manifest.update({
        'count': len(samples),
        'requested': len(params_list),
        'excluded': excluded,
        'lhs': lhs,
        'created_at': timeutils.utcnow().isoformat(),
        'platform': platform.platform(),
    })
    return Dataset(samples=samples, manifest=manifest)


def generate_lhs(config, n=None):
    """Sample ``n`` geometries by LHS under the config seed and generate."""
    n = config.n_samples if n is None else n
    params = lhs_sample(n, config.bounds, config.seed)
    return generate(params, config, lhs={'n': int(n), 'seed': config.seed})


def regenerate_params(manifest):
    """Repeat the sampling call recorded in a manifest."""
    lhs = manifest.get('lhs')
    if not lhs:
        raise exceptions.DataError(
            reason=_("manifest has no sampling record"))
    bounds = {k: tuple(v) for k, v in manifest['bounds'].items()}
    return lhs_sample(lhs['n'], bounds, lhs['seed'])


def split(dataset, train_fraction, seed=0):
    """Seeded shuffle split into ``(train, test)``."""
    if not 0.0 < train_fraction < 1.0:
        raise exceptions.InputDomainError(
            reason=_("train fraction must lie in (0, 1), got %s") %
            train_fraction)
    n = len(dataset)
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise exceptions.InputDomainError(
            reason=_("fraction %(f)s of %(n)d samples leaves one side "
                     "empty") % {'f': train_fraction, 'n': n})
    order = np.random.default_rng(seed).permutation(n)
    return (dataset.subset(sorted(order[:n_train])),
            dataset.subset(sorted(order[n_train:])))


def _sample_files(root, sample, levels):
    base = os.path.join(root, SAMPLES_DIR, sample)
    files = {'mesh-x': os.path.join(base, 'mesh-x.bin'),
             'mesh-y': os.path.join(base, 'mesh-y.bin')}
    for level in range(levels):
        files['solution-%d' % level] = os.path.join(
            base, 'solution-%d.bin' % level)
        files['tilde-%d' % level] = os.path.join(
            base, 'tilde-%d.bin' % level)
    return base, files


def save(dataset, path):
    utils.ensure_dir(path)
    entries = []
    for sample in dataset.samples:
        base, files = _sample_files(path, sample.sample_id, dataset.levels)
        utils.ensure_dir(base)
        fileutils.write_array(files['mesh-x'], sample.mesh.x)
        fileutils.write_array(files['mesh-y'], sample.mesh.y)
        for level in range(dataset.levels):
            fileutils.write_array(files['solution-%d' % level],
                                  sample.solutions[level].values)
            fileutils.write_array(files['tilde-%d' % level],
                                  sample.tilde_v[level].values)
        entries.append({'id': sample.sample_id,
                        'params': sample.params.to_dict()})
    manifest = dict(dataset.manifest)
    manifest['version'] = fileutils.FORMAT_VERSION
    manifest['count'] = len(entries)
    manifest['samples'] = entries
    fileutils.write_json(os.path.join(path, MANIFEST), manifest)
    LOG.info(_LI("Saved %(n)d samples to %(path)s"),
             {'n': len(entries), 'path': path})


def _read_checked(path, shape):
    values = fileutils.read_array(path)
    if values.shape != tuple(shape):
        raise exceptions.LoadError(
            path=path, reason=_("shape %(got)s, expected %(want)s") % {
                'got': values.shape, 'want': tuple(shape)})
    return values


def load(path):
    manifest = fileutils.read_json(os.path.join(path, MANIFEST))
    levels = manifest['levels']
    dims = [tuple(d) for d in manifest['dims']]
    samples = []
    for entry in manifest.pop('samples', []):
        _base, files = _sample_files(path, entry['id'], levels)
        mesh = meshgen.StructuredMesh(
            x=_read_checked(files['mesh-x'], dims[-1]),
            y=_read_checked(files['mesh-y'], dims[-1]))
        solutions = tuple(thermal_fd.ScalarField(
            values=_read_checked(files['solution-%d' % l], dims[l]),
            level=l) for l in range(levels))
        tilde_v = tuple(thermal_fd.ScalarField(
            values=_read_checked(files['tilde-%d' % l], dims[l]),
            level=l) for l in range(levels))
        samples.append(Sample(
            sample_id=entry['id'],
            params=geometry.GeometryParams.from_dict(entry['params']),
            solutions=solutions, tilde_v=tilde_v, mesh=mesh))
    if len(samples) != manifest.get('count', len(samples)):
        raise exceptions.LoadError(
            path=os.path.join(path, MANIFEST),
            reason=_("sample count does not match"))
    return Dataset(samples=samples, manifest=manifest)
