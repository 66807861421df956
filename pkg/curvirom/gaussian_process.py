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
Scalar Gaussian-process regression with a rational quadratic kernel.

    k(a, b) = s2 * (1 + |a - b|^2 / (2 * shape * ls^2)) ** -shape

Hyperparameters are searched in log space by maximizing the log marginal
likelihood with multi-start L-BFGS-B.  With two or more samples the targets
are standardized internally; inputs are mapped to the unit hypercube when
bounds are supplied.
"""

import collections
import dataclasses
import logging
import os

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.spatial import distance

from curvirom import exceptions
from curvirom import fileutils
from curvirom.i18n import _
from curvirom.i18n import _LW

LOG = logging.getLogger(__name__)

PARAM_ORDER = ('signal_variance', 'length_scale', 'shape', 'noise_variance')

# Log-space search box, in standardized target units.
DEFAULT_HYPER_BOUNDS = collections.OrderedDict([
    ('signal_variance', (1e-4, 1e2)),
    ('length_scale', (1e-2, 1e1)),
    ('shape', (1e-2, 1e3)),
    ('noise_variance', (1e-10, 1e-2)),
])
_DEFAULT_START = (1.0, 0.3, 1.0, 1e-6)

NOISE_FLOOR = 1e-10
JITTER_START = 1e-10
JITTER_MAX = 1e-4
DEFAULT_OPT_BUDGET = 800
DEFAULT_RESTARTS = 8

# Returned instead of the likelihood when the covariance cannot be factored.
_PENALTY = 1e25


@dataclasses.dataclass(frozen=True)
class RqKernelParams(object):
    signal_variance: float = 1.0
    length_scale: float = 1.0
    shape: float = 1.0
    noise_variance: float = NOISE_FLOOR

    def __post_init__(self):
        for name in PARAM_ORDER:
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0.0):
                raise exceptions.InputDomainError(
                    reason=_("kernel parameter %(name)s must be positive, "
                             "got %(value)s") % {'name': name,
                                                 'value': value})
            object.__setattr__(self, name, value)
        if self.noise_variance < NOISE_FLOOR:
            object.__setattr__(self, 'noise_variance', NOISE_FLOOR)

    @classmethod
    def from_log(cls, theta):
        return cls(*np.exp(np.asarray(theta, dtype=float)))

    def to_log(self):
        return np.log([getattr(self, name) for name in PARAM_ORDER])

    def to_dict(self):
        return dataclasses.asdict(self)


def _check_dims(a, b):
    if a.shape[-1] != b.shape[-1]:
        raise exceptions.DataError(
            reason=_("input dimensions differ: %(a)d vs %(b)d") % {
                'a': a.shape[-1], 'b': b.shape[-1]})


def rq_kernel(a, b, params):
    """Kernel value between two input points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    _check_dims(a, b)
    r2 = float(np.sum((a - b) ** 2))
    return params.signal_variance * (
        1.0 + r2 / (2.0 * params.shape * params.length_scale ** 2)
    ) ** (-params.shape)


def rq_kernel_matrix(A, B, params):
    """Cross-covariance between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _check_dims(A, B)
    r2 = distance.cdist(A, B, 'sqeuclidean')
    return params.signal_variance * (
        1.0 + r2 / (2.0 * params.shape * params.length_scale ** 2)
    ) ** (-params.shape)


def _kernel_and_gradient(X, theta):
    """Noise-free Gram matrix and its derivatives in log parameters."""
    s2, ls, shape, _noise = np.exp(theta)
    r2 = distance.squareform(distance.pdist(X, 'sqeuclidean')) \
        if len(X) > 1 else np.zeros((1, 1))
    base = 1.0 + r2 / (2.0 * shape * ls ** 2)
    K = s2 * base ** (-shape)
    dK = np.empty((3,) + K.shape)
    dK[0] = K
    dK[1] = K * r2 / (ls ** 2 * base)
    dK[2] = K * shape * ((base - 1.0) / base - np.log(base))
    return K, dK


def log_marginal_likelihood(params, X, y, gradient=False):
    """Log evidence of targets ``y`` at inputs ``X``.

    :param params: :class:`RqKernelParams` or a log-parameter vector.
    :returns: the value, or ``(value, d value / d log params)`` when
              ``gradient`` is set.
    :raises scipy.linalg.LinAlgError: when the covariance is not positive
                                      definite.
    """
    theta = params.to_log() if isinstance(params, RqKernelParams) else \
        np.asarray(params, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    noise = max(np.exp(theta[3]), NOISE_FLOOR)
    K, dK = _kernel_and_gradient(X, theta)
    factor = scipy.linalg.cho_factor(K + noise * np.eye(len(y)), lower=True)
    alpha = scipy.linalg.cho_solve(factor, y)
    lml = (-0.5 * y.dot(alpha) - np.sum(np.log(np.diag(factor[0]))) -
           0.5 * len(y) * np.log(2.0 * np.pi))
    if not gradient:
        return float(lml)
    inner = np.outer(alpha, alpha) - scipy.linalg.cho_solve(
        factor, np.eye(len(y)))
    grad = np.empty(4)
    for k in range(3):
        grad[k] = 0.5 * np.sum(inner * dK[k])
    grad[3] = 0.5 * noise * np.trace(inner)
    return float(lml), grad


def _negative_lml(theta, X, y):
    try:
        lml, grad = log_marginal_likelihood(theta, X, y, gradient=True)
    except (np.linalg.LinAlgError, ValueError):
        return _PENALTY, np.zeros_like(theta)
    if not np.isfinite(lml):
        return _PENALTY, np.zeros_like(theta)
    return -lml, -grad


@dataclasses.dataclass(frozen=True, eq=False)
class GpModel(object):
    """A fitted scalar GP.

    ``X`` holds the normalized inputs and ``y`` the raw targets; ``factor``
    is the lower Cholesky factor of ``K + (noise + jitter) I`` in
    standardized units and ``weights`` solves that system for the
    standardized targets.
    """

    X: np.ndarray
    y: np.ndarray
    params: RqKernelParams
    factor: np.ndarray
    weights: np.ndarray
    y_offset: float = 0.0
    y_scale: float = 1.0
    jitter: float = 0.0
    lower: np.ndarray = None
    upper: np.ndarray = None
    log_likelihood: float = float('nan')

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_inputs(self):
        return self.X.shape[1]

    def normalize(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n_inputs:
            raise exceptions.DataError(
                reason=_("expected %(want)d inputs, got %(got)d") % {
                    'want': self.n_inputs, 'got': points.shape[1]})
        if self.lower is None:
            return points
        return (points - self.lower) / (self.upper - self.lower)


def _normalize_inputs(X, bounds):
    if bounds is None:
        return X, None, None
    lower = np.asarray(bounds[0], dtype=float)
    upper = np.asarray(bounds[1], dtype=float)
    if lower.shape != (X.shape[1],) or upper.shape != (X.shape[1],):
        raise exceptions.DataError(
            reason=_("normalization bounds must have one entry per input"))
    if np.any(upper <= lower):
        raise exceptions.InputDomainError(
            reason=_("normalization bounds need lower < upper"))
    return (X - lower) / (upper - lower), lower, upper


def _standardize(y):
    if len(y) < 2:
        return y, 0.0, 1.0
    offset = float(np.mean(y))
    scale = float(np.std(y))
    if not scale > 0.0:
        scale = 1.0
    return (y - offset) / scale, offset, scale


def _factorize(X, y_std, params):
    """Cholesky factor with escalating diagonal jitter."""
    K = rq_kernel_matrix(X, X, params) + params.noise_variance * np.eye(
        len(X))
    jitter = 0.0
    while True:
        try:
            factor = scipy.linalg.cholesky(K + jitter * np.eye(len(X)),
                                           lower=True)
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX * (1.0 + 1e-9):
                raise exceptions.ConditioningError(jitter=JITTER_MAX)
            LOG.warning(_LW("Covariance not positive definite, retrying "
                            "with jitter %.1e"), jitter)
    weights = scipy.linalg.cho_solve((factor, True), y_std)
    return factor, weights, jitter


def _search(X, y_std, opt_budget, restarts, seed, hyper_bounds):
    log_box = np.log(np.array([hyper_bounds[name] for name in PARAM_ORDER]))
    rng = np.random.default_rng(seed)
    restarts = max(1, int(restarts))
    maxfun = max(1, int(opt_budget) // restarts)
    starts = [np.clip(np.log(_DEFAULT_START), log_box[:, 0], log_box[:, 1])]
    starts.extend(rng.uniform(log_box[:, 0], log_box[:, 1])
                  for _i in range(restarts - 1))

    best_theta, best_value = starts[0], np.inf
    for theta0 in starts:
        result = scipy.optimize.minimize(
            _negative_lml, theta0, args=(X, y_std), jac=True,
            method='L-BFGS-B', bounds=log_box,
            options={'maxfun': maxfun})
        if np.isfinite(result.fun) and result.fun < best_value:
            best_theta, best_value = result.x, float(result.fun)
    if best_value >= _PENALTY:
        LOG.warning(_LW("No start point gave a factorizable covariance; "
                        "using the default hyperparameters"))
    return RqKernelParams.from_log(best_theta)


def gp_fit(X, y, opt_budget=DEFAULT_OPT_BUDGET, seed=0,
           restarts=DEFAULT_RESTARTS, bounds=None, hyper_bounds=None,
           params=None):
    """Fit a GP to inputs ``X`` (N x p) and targets ``y`` (N).

    :param opt_budget: likelihood evaluations shared by all restarts.
    :param bounds: optional ``(lower, upper)`` arrays used to map the
                   inputs to the unit hypercube.
    :param params: fixed :class:`RqKernelParams`; skips the search.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise exceptions.DataError(
            reason=_("need matching inputs and targets, got %(x)d and "
                     "%(y)d") % {'x': X.shape[0], 'y': y.shape[0]})
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise exceptions.DataError(
            reason=_("training data must be finite"))

    Xn, lower, upper = _normalize_inputs(X, bounds)
    y_std, offset, scale = _standardize(y)
    if params is None:
        params = _search(Xn, y_std, opt_budget, restarts, seed,
                         hyper_bounds or DEFAULT_HYPER_BOUNDS)
    factor, weights, jitter = _factorize(Xn, y_std, params)
    try:
        lml = log_marginal_likelihood(params, Xn, y_std)
    except np.linalg.LinAlgError:
        lml = float('nan')
    LOG.debug("GP fit on %d points: %s, jitter %.1e, log evidence %.4g",
              len(y), params, jitter, lml)
    return GpModel(X=Xn, y=y, params=params, factor=factor, weights=weights,
                   y_offset=offset, y_scale=scale, jitter=jitter,
                   lower=lower, upper=upper, log_likelihood=lml)


def gp_predict_many(model, points):
    """Posterior means and variances at each row of ``points``."""
    Xs = model.normalize(points)
    Ks = rq_kernel_matrix(Xs, model.X, model.params)
    mean = Ks.dot(model.weights)
    v = scipy.linalg.solve_triangular(model.factor, Ks.T, lower=True)
    var = model.params.signal_variance - np.sum(v ** 2, axis=0)
    var = np.clip(var, 0.0, None)
    return (mean * model.y_scale + model.y_offset,
            var * model.y_scale ** 2)


def gp_predict(model, x):
    """Posterior ``(mean, variance)`` at a single point."""
    x = np.asarray(x, dtype=float).ravel()
    mean, var = gp_predict_many(model, x[None, :])
    return float(mean[0]), float(var[0])


def save_models(models, directory, prefix):
    """Persist GPs sharing one input set as stacked arrays."""
    models = list(models)
    meta = {'version': fileutils.FORMAT_VERSION, 'count': len(models),
            'models': []}
    if models:
        X = models[0].X
        fileutils.write_array(os.path.join(directory, prefix + '.X.bin'), X)
        fileutils.write_array(os.path.join(directory, prefix + '.y.bin'),
                              np.stack([m.y for m in models]))
        fileutils.write_array(
            os.path.join(directory, prefix + '.factor.bin'),
            np.stack([m.factor for m in models]))
        lower = models[0].lower
        meta['lower'] = None if lower is None else lower.tolist()
        meta['upper'] = None if lower is None else models[0].upper.tolist()
    for m in models:
        meta['models'].append({
            'params': m.params.to_dict(),
            'y_offset': m.y_offset,
            'y_scale': m.y_scale,
            'jitter': m.jitter,
            'log_likelihood': m.log_likelihood,
        })
    fileutils.write_json(os.path.join(directory, prefix + '.json'), meta)


def load_models(directory, prefix):
    meta_path = os.path.join(directory, prefix + '.json')
    meta = fileutils.read_json(meta_path)
    if not meta['count']:
        return []
    X = fileutils.read_array(os.path.join(directory, prefix + '.X.bin'))
    ys = fileutils.read_array(os.path.join(directory, prefix + '.y.bin'))
    factors = fileutils.read_array(
        os.path.join(directory, prefix + '.factor.bin'))
    n = X.shape[0]
    if (ys.shape != (meta['count'], n) or
            factors.shape != (meta['count'], n, n)):
        raise exceptions.LoadError(
            path=meta_path, reason=_("GP arrays do not match sidecar"))
    lower = None if meta['lower'] is None else np.array(meta['lower'])
    upper = None if meta['upper'] is None else np.array(meta['upper'])
    models = []
    for entry, y, factor in zip(meta['models'], ys, factors):
        offset, scale = entry['y_offset'], entry['y_scale']
        weights = scipy.linalg.cho_solve((factor, True),
                                          (y - offset) / scale)
        models.append(GpModel(
            X=X, y=y, params=RqKernelParams(**entry['params']),
            factor=factor, weights=weights, y_offset=offset, y_scale=scale,
            jitter=entry['jitter'], lower=lower, upper=upper,
            log_likelihood=entry['log_likelihood']))
    return models
