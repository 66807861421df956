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
The thermal surrogate: per-level POD bases with one GP per retained
coefficient, mapping geometry parameters to the finest temperature field.

In ``multi`` mode level ``l`` models the decomposition part ``tilde_v[l]``
and a prediction is recomposed coarsest-first.  In ``single`` mode only
the finest solution is modelled.
"""

import collections
import dataclasses
import logging
import os

import numpy as np
from oslo_utils import uuidutils

from curvirom import exceptions
from curvirom import fileutils
from curvirom import gaussian_process
from curvirom import geometry
from curvirom.i18n import _
from curvirom.i18n import _LI
from curvirom.i18n import _LW
from curvirom import meshgen
from curvirom import multilevel
from curvirom import pod
from curvirom import thermal_fd
from curvirom import utils

LOG = logging.getLogger(__name__)

MULTI = 'multi'
SINGLE = 'single'
MODES = (MULTI, SINGLE)

MANIFEST = 'manifest.json'

METRIC_DEFINITIONS = {
    'mae': 'mean over samples of mean |T_pred - T_true| over nodes, in K',
    'mre': 'mean over samples of mean |T_pred - T_true| / '
           '(max T_true - min T_true)',
}


@dataclasses.dataclass(frozen=True, eq=False)
class LevelModel(object):
    basis: pod.PodBasis
    gps: tuple
    level: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'gps', tuple(self.gps))
        if len(self.gps) != self.basis.dim:
            raise exceptions.DataError(
                reason=_("level %(level)d has %(gps)d GPs for %(dim)d "
                         "modes") % {'level': self.level,
                                     'gps': len(self.gps),
                                     'dim': self.basis.dim})


@dataclasses.dataclass(frozen=True, eq=False)
class ThermalSurrogate(object):
    levels: tuple
    dims: tuple
    bounds: dict
    bc: dict
    mode: str = MULTI
    settings: dict = dataclasses.field(default_factory=dict)
    surrogate_id: str = None

    def __post_init__(self):
        object.__setattr__(self, 'levels', tuple(self.levels))
        object.__setattr__(self, 'dims', tuple(tuple(d) for d in self.dims))
        if self.mode not in MODES:
            raise exceptions.InputDomainError(
                reason=_("unknown surrogate mode '%s'") % self.mode)
        if not self.levels:
            raise exceptions.DataError(reason=_("surrogate has no levels"))
        if self.surrogate_id is None:
            object.__setattr__(self, 'surrogate_id',
                               uuidutils.generate_uuid())

    @property
    def L(self):
        return len(self.dims)

    @property
    def finest_dims(self):
        return self.dims[-1]

    def describe(self):
        return [{'level': m.level,
                 'dims': m.basis.shape,
                 'modes': m.basis.dim,
                 'energy': m.basis.energy}
                for m in self.levels]


@dataclasses.dataclass(frozen=True, eq=False)
class ThermalPrediction(thermal_fd.ScalarField):
    """A predicted field flagged when the parameters lie outside the
    training bounds.  ``variance`` sums the per-level GP variances and is
    diagnostic only.
    """

    out_of_range: bool = False
    outside: tuple = ()
    variance: np.ndarray = None


@dataclasses.dataclass(frozen=True, eq=False)
class CombinedPrediction(object):
    mesh: meshgen.StructuredMesh
    field: ThermalPrediction
    provenance: dict

    def __post_init__(self):
        if self.mesh.shape != self.field.shape:
            raise exceptions.DataError(
                reason=_("mesh %(m)s and field %(f)s shapes differ") % {
                    'm': self.mesh.shape, 'f': self.field.shape})


@dataclasses.dataclass(frozen=True)
class EvaluationReport(object):
    mae: float
    mre: float
    per_sample: tuple


def _thresholds(config, count):
    value = config.energy_threshold
    if isinstance(value, (list, tuple)):
        if len(value) != count:
            raise exceptions.DataError(
                reason=_("%(got)d energy thresholds for %(want)d levels") % {
                    'got': len(value), 'want': count})
        return [float(v) for v in value]
    return [float(value)] * count


def _training_fields(dataset, mode):
    """Per-level snapshot fields of every training sample."""
    if mode == SINGLE:
        return [[s.solutions[-1] for s in dataset.samples]]
    return [[s.tilde_v[l] for s in dataset.samples]
            for l in range(dataset.levels)]


def _fit_coefficient(task):
    level, index, X, y, lower, upper, budget, restarts, seed = task
    try:
        return gaussian_process.gp_fit(
            X, y, opt_budget=budget, seed=seed, restarts=restarts,
            bounds=(lower, upper))
    except exceptions.CurviromException as e:
        return e


def train_thermal(dataset, config, mode=None):
    """Fit bases and coefficient GPs on a training dataset.

    :param config: a :class:`curvirom.conf.RunConfig`; ``mode`` overrides
                   its ``mode``.
    """
    mode = config.mode if mode is None else mode
    if mode not in MODES:
        raise exceptions.InputDomainError(
            reason=_("unknown surrogate mode '%s'") % mode)
    if len(dataset) < 2:
        raise exceptions.DataError(
            reason=_("need at least 2 training samples, got %d") %
            len(dataset))
    if config.levels != dataset.levels:
        raise exceptions.DataError(
            reason=_("dataset was generated with %(have)d levels, not "
                     "%(want)d") % {'have': dataset.levels,
                                    'want': config.levels})

    fields = _training_fields(dataset, mode)
    thresholds = _thresholds(config, len(fields))
    bounds = collections.OrderedDict(
        (k, tuple(v)) for k, v in dataset.manifest['bounds'].items())
    lower = np.array([bounds[n][0] for n in geometry.PARAM_NAMES])
    upper = np.array([bounds[n][1] for n in geometry.PARAM_NAMES])
    X = dataset.params_array()

    bases, tasks = [], []
    for level, level_fields in enumerate(fields):
        snapshots = pod.SnapshotMatrix.from_fields(level_fields, level=level)
        try:
            basis = pod.fit_pod(snapshots, thresholds[level])
        except exceptions.CurviromException as e:
            raise exceptions.LevelError(level=level, reason=e) from e
        bases.append(basis)
        coeffs = pod.project_columns(basis, snapshots)
        level_seed = utils.child_seed(config.seed, level)
        for k in range(basis.dim):
            tasks.append((level, k, X, coeffs[:, k], lower, upper,
                          config.gp_budget, config.gp_restarts,
                          utils.child_seed(level_seed, k)))

    LOG.info(_LI("Training %(mode)s-level surrogate: %(n)d samples, modes "
                 "per level %(modes)s"),
             {'mode': mode, 'n': len(dataset),
              'modes': [b.dim for b in bases]})
    results = utils.run_tasks(_fit_coefficient, tasks,
                              max(1, int(config.threads)))

    gps = [[] for _b in bases]
    for task, result in zip(tasks, results):
        level, index = task[0], task[1]
        if isinstance(result, Exception):
            raise exceptions.LevelError(
                level=level,
                reason=_("coefficient %(k)d: %(err)s") % {
                    'k': index, 'err': result}) from result
        gps[level].append(result)

    dims = dataset.dims if mode == MULTI else [dataset.dims[-1]]
    return ThermalSurrogate(
        levels=[LevelModel(basis=b, gps=g, level=l)
                for l, (b, g) in enumerate(zip(bases, gps))],
        dims=dims, bounds=bounds, bc=dict(dataset.manifest['bc']),
        mode=mode,
        settings={'energy_threshold': thresholds,
                  'gp_budget': config.gp_budget,
                  'gp_restarts': config.gp_restarts,
                  'seed': config.seed,
                  'train_count': len(dataset)})


def _predict_level(model, x):
    means = np.empty(model.basis.dim)
    variances = np.empty(model.basis.dim)
    for k, gp in enumerate(model.gps):
        means[k], variances[k] = gaussian_process.gp_predict(gp, x)
    field = pod.reconstruct(model.basis, means)
    variance = (model.basis.vectors ** 2).dot(variances).reshape(
        model.basis.shape)
    return field, variance


def predict_thermal(surrogate, params):
    """Finest-level temperature predicted for ``params``."""
    outside = params.out_of_range(surrogate.bounds)
    if outside:
        LOG.warning(_LW("Parameters %(params)s lie outside the training "
                        "bounds in %(fields)s"),
                    {'params': dict(params.to_dict()),
                     'fields': ', '.join(outside)})
    x = params.as_array()
    parts, variances = [], []
    for model in surrogate.levels:
        field, variance = _predict_level(model, x)
        parts.append(thermal_fd.ScalarField(values=field.values,
                                            level=model.level))
        variances.append(variance)

    if surrogate.mode == MULTI:
        values = multilevel.recompose(
            multilevel.LevelDecomposition(tilde_v=parts)).values
        variance = variances[0]
        for part in variances[1:]:
            variance = multilevel.prolongate(
                variance, part.shape).values + part
    else:
        values = parts[-1].values
        variance = variances[-1]
    variance = np.array(variance)
    variance.flags.writeable = False
    return ThermalPrediction(values=values, level=surrogate.L - 1,
                             out_of_range=bool(outside),
                             outside=tuple(outside), variance=variance)


def predict_combined(surrogate, params, mesh_options=None):
    """Relaxed finest mesh and predicted temperature for ``params``."""
    n_eta, n_xi = surrogate.finest_dims
    mesh = meshgen.generate_mesh(params, n_eta, n_xi,
                                 **(mesh_options or {}))
    field = predict_thermal(surrogate, params)
    return CombinedPrediction(
        mesh=mesh, field=field,
        provenance={'params': params.to_dict(),
                    'surrogate_id': surrogate.surrogate_id,
                    'mode': surrogate.mode,
                    'out_of_range': field.out_of_range})


def evaluate_fields(predicted, truths, sample_ids=None):
    """MAE/MRE of predicted against true finest-level fields."""
    predicted = list(predicted)
    truths = list(truths)
    if not truths:
        raise exceptions.InputDomainError(reason=_("empty test set"))
    if len(predicted) != len(truths):
        raise exceptions.DataError(
            reason=_("%(p)d predictions for %(t)d truths") % {
                'p': len(predicted), 't': len(truths)})
    if sample_ids is None:
        sample_ids = ['sample-%05d' % i for i in range(len(truths))]
    rows = []
    for sid, pred, truth in zip(sample_ids, predicted, truths):
        pred = getattr(pred, 'values', pred)
        truth = getattr(truth, 'values', truth)
        if np.shape(pred) != np.shape(truth):
            raise exceptions.DataError(
                reason=_("prediction %(p)s and truth %(t)s shapes differ") %
                {'p': np.shape(pred), 't': np.shape(truth)})
        err = np.abs(np.asarray(pred) - np.asarray(truth))
        span = float(np.ptp(truth)) or 1.0
        rows.append({'sample': sid, 'mae': float(err.mean()),
                     'mre': float(err.mean()) / span,
                     'max_abs': float(err.max())})
    return EvaluationReport(mae=float(np.mean([r['mae'] for r in rows])),
                            mre=float(np.mean([r['mre'] for r in rows])),
                            per_sample=tuple(rows))


def evaluate(surrogate, test):
    """Surrogate accuracy on a test dataset carrying finest-level truth."""
    if not len(test):
        raise exceptions.InputDomainError(reason=_("empty test set"))
    predicted = [predict_thermal(surrogate, s.params) for s in test.samples]
    return evaluate_fields(predicted, [s.truth for s in test.samples],
                           [s.sample_id for s in test.samples])


def compare_modes(train, test, config):
    """Test accuracy of the multi- and single-level surrogates."""
    rows = []
    for mode in MODES:
        report = evaluate(train_thermal(train, config, mode=mode), test)
        rows.append({'mode': mode, 'mae': report.mae, 'mre': report.mre})
    return rows


def dataset_size_study(train, test, sizes, config):
    """Test accuracy when training on the first ``size`` samples."""
    rows = []
    for size in sizes:
        size = int(size)
        if not 2 <= size <= len(train):
            raise exceptions.InputDomainError(
                reason=_("training size %(size)d outside [2, %(n)d]") % {
                    'size': size, 'n': len(train)})
        report = evaluate(
            train_thermal(train.subset(range(size)), config), test)
        rows.append({'size': size, 'mae': report.mae, 'mre': report.mre})
    return rows


def save_surrogate(surrogate, path):
    utils.ensure_dir(path)
    levels = []
    for model in surrogate.levels:
        basis_prefix = 'level-%d.basis' % model.level
        gp_prefix = 'level-%d.gp' % model.level
        pod.save_basis(model.basis, path, basis_prefix)
        gaussian_process.save_models(model.gps, path, gp_prefix)
        levels.append({'level': model.level,
                       'dims': list(model.basis.shape),
                       'modes': model.basis.dim,
                       'energy': model.basis.energy,
                       'basis': basis_prefix,
                       'gps': gp_prefix})
    fileutils.write_json(os.path.join(path, MANIFEST), {
        'version': fileutils.FORMAT_VERSION,
        'surrogate_id': surrogate.surrogate_id,
        'mode': surrogate.mode,
        'dims': [list(d) for d in surrogate.dims],
        'bounds': {k: list(v) for k, v in surrogate.bounds.items()},
        'bc': surrogate.bc,
        'settings': surrogate.settings,
        'metrics': METRIC_DEFINITIONS,
        'levels': levels,
    })
    LOG.info(_LI("Saved surrogate %(id)s to %(path)s"),
             {'id': surrogate.surrogate_id, 'path': path})


def load_surrogate(path):
    manifest = fileutils.read_json(os.path.join(path, MANIFEST))
    levels = []
    for entry in manifest['levels']:
        basis = pod.load_basis(path, entry['basis'])
        gps = gaussian_process.load_models(path, entry['gps'])
        levels.append(LevelModel(basis=basis, gps=gps,
                                 level=entry['level']))
    bounds = collections.OrderedDict(
        (name, tuple(manifest['bounds'][name]))
        for name in geometry.PARAM_NAMES)
    return ThermalSurrogate(levels=levels, dims=manifest['dims'],
                            bounds=bounds, bc=manifest['bc'],
                            mode=manifest['mode'],
                            settings=manifest['settings'],
                            surrogate_id=manifest['surrogate_id'])
