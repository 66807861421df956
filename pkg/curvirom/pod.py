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
Proper orthogonal decomposition of per-level snapshot matrices.

Snapshots are row-major flattened ``[eta][xi]`` fields stored as columns
and are not mean-centred: a field is expanded directly in the basis.
"""

import dataclasses
import logging
import os

import numpy as np
import scipy.linalg

from curvirom import exceptions
from curvirom import fileutils
from curvirom.i18n import _
from curvirom import thermal_fd

LOG = logging.getLogger(__name__)

DEFAULT_ENERGY_THRESHOLD = 0.9999
GRAM_EIGEN_RTOL = 1e-12

# Use the snapshot Gram matrix once the grid is this many times taller
# than the snapshot count.
GRAM_ASPECT = 4


@dataclasses.dataclass(frozen=True, eq=False)
class SnapshotMatrix(object):
    columns: np.ndarray
    shape: tuple
    level: int = 0

    def __post_init__(self):
        columns = np.array(self.columns, dtype=float)
        shape = tuple(int(d) for d in self.shape)
        if columns.ndim != 2 or columns.shape[1] < 1:
            raise exceptions.DataError(
                reason=_("snapshot matrix needs at least one column"))
        if columns.shape[0] != shape[0] * shape[1]:
            raise exceptions.DataError(
                reason=_("snapshot length %(n)d does not match field shape "
                         "%(shape)s") % {'n': columns.shape[0],
                                         'shape': shape})
        object.__setattr__(self, 'columns', columns)
        object.__setattr__(self, 'shape', shape)

    @classmethod
    def from_fields(cls, fields, level=None):
        fields = list(fields)
        if not fields:
            raise exceptions.DataError(reason=_("no snapshots"))
        shape = fields[0].shape
        for f in fields:
            if f.shape != shape:
                raise exceptions.DataError(
                    reason=_("snapshot shapes differ: %(a)s vs %(b)s") % {
                        'a': shape, 'b': f.shape})
        columns = np.column_stack([f.values.ravel() for f in fields])
        if level is None:
            level = fields[0].level
        return cls(columns=columns, shape=shape, level=level)

    @property
    def count(self):
        return self.columns.shape[1]


@dataclasses.dataclass(frozen=True, eq=False)
class PodBasis(object):
    """Orthonormal POD modes of one level.

    ``vectors`` holds the retained modes as columns; ``singular_values``
    holds every computed singular value in descending order.
    """

    vectors: np.ndarray
    singular_values: np.ndarray
    shape: tuple
    threshold: float
    level: int = 0

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def energy(self):
        total = float(np.sum(self.singular_values ** 2))
        if total == 0.0:
            return 0.0
        return float(np.sum(self.singular_values[:self.dim] ** 2)) / total


@dataclasses.dataclass(frozen=True, eq=False)
class CoeffVector(object):
    c: np.ndarray
    level: int = 0

    def __post_init__(self):
        c = np.array(self.c, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise exceptions.DataError(
                reason=_("POD coefficients must be finite"))
        object.__setattr__(self, 'c', c)


def _thin_svd(columns):
    u, s, _vt = scipy.linalg.svd(columns, full_matrices=False,
                                 lapack_driver='gesdd')
    rank_tol = s[0] * max(columns.shape) * np.finfo(float).eps
    keep = s > rank_tol
    return u[:, keep], s[keep], s


def _gram_svd(columns):
    # Method of snapshots followed by a Rayleigh-Ritz pass on the
    # orthonormalized span, which restores orthogonality of weak modes.
    gram = columns.T.dot(columns)
    lam, vecs = scipy.linalg.eigh(gram)
    lam = lam[::-1]
    vecs = vecs[:, ::-1]
    keep = lam > GRAM_EIGEN_RTOL * lam[0]
    span, _r = scipy.linalg.qr(columns.dot(vecs[:, keep]), mode='economic')
    small_u, s, _vt = scipy.linalg.svd(span.T.dot(columns),
                                       full_matrices=False)
    s_all = np.sqrt(np.clip(lam, 0.0, None))
    s_all[:len(s)] = s
    return span.dot(small_u), s, s_all


def _fix_signs(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def fit_pod(snapshots, energy_threshold=DEFAULT_ENERGY_THRESHOLD,
            method='auto'):
    """Fit the smallest basis capturing ``energy_threshold`` of the energy.

    :param method: ``'svd'`` (thin SVD), ``'gram'`` (eigendecomposition of
                   the snapshot Gram matrix) or ``'auto'``.
    """
    if not 0.0 < energy_threshold <= 1.0:
        raise exceptions.InputDomainError(
            reason=_("energy threshold must lie in (0, 1], got %s") %
            energy_threshold)
    columns = snapshots.columns
    if not np.any(columns):
        raise exceptions.DegenerateDataError(
            reason=_("all snapshots of level %d are zero") % snapshots.level)

    if method == 'auto':
        method = ('gram' if columns.shape[0] >= GRAM_ASPECT *
                  columns.shape[1] else 'svd')
    if method == 'gram':
        u, s, s_all = _gram_svd(columns)
    elif method == 'svd':
        u, s, s_all = _thin_svd(columns)
    else:
        raise exceptions.InputDomainError(
            reason=_("unknown POD method '%s'") % method)

    energy = np.cumsum(s_all ** 2) / np.sum(s_all ** 2)
    dim = int(np.searchsorted(energy, energy_threshold, side='left')) + 1
    dim = max(1, min(dim, len(s)))

    vectors = _fix_signs(u[:, :dim])
    vectors.flags.writeable = False
    s_all.flags.writeable = False
    basis = PodBasis(vectors=vectors, singular_values=s_all,
                     shape=snapshots.shape, threshold=float(energy_threshold),
                     level=snapshots.level)
    LOG.debug("POD level %d: %d snapshots of %s, kept %d modes "
              "(energy %.10f)", basis.level, snapshots.count,
              'x'.join(map(str, basis.shape)), dim, basis.energy)
    return basis


def _flat(basis, field):
    values = field.values if isinstance(field, thermal_fd.ScalarField) else \
        np.asarray(field, dtype=float)
    if values.shape != basis.shape:
        raise exceptions.DataError(
            reason=_("field shape %(f)s does not match basis %(b)s") % {
                'f': values.shape, 'b': basis.shape})
    return values.ravel()


def project(basis, field):
    return CoeffVector(c=basis.vectors.T.dot(_flat(basis, field)),
                       level=basis.level)


def project_columns(basis, snapshots):
    """Coefficients of every snapshot, shape ``(n_snapshots, dim)``."""
    if tuple(snapshots.shape) != tuple(basis.shape):
        raise exceptions.DataError(
            reason=_("snapshot shape %(s)s does not match basis %(b)s") % {
                's': snapshots.shape, 'b': basis.shape})
    return snapshots.columns.T.dot(basis.vectors)


def reconstruct(basis, coeffs):
    c = coeffs.c if isinstance(coeffs, CoeffVector) else \
        np.asarray(coeffs, dtype=float).ravel()
    if c.size != basis.dim:
        raise exceptions.DataError(
            reason=_("got %(n)d coefficients for a %(dim)d-mode basis") % {
                'n': c.size, 'dim': basis.dim})
    return thermal_fd.ScalarField(
        values=basis.vectors.dot(c).reshape(basis.shape), level=basis.level)


def save_basis(basis, directory, prefix):
    fileutils.write_array(os.path.join(directory, prefix + '.vectors.bin'),
                          basis.vectors)
    fileutils.write_array(os.path.join(directory, prefix + '.sigma.bin'),
                          basis.singular_values)
    fileutils.write_json(os.path.join(directory, prefix + '.json'), {
        'version': fileutils.FORMAT_VERSION,
        'level': basis.level,
        'dims': list(basis.shape),
        'dim': basis.dim,
        'threshold': basis.threshold,
        'energy': basis.energy,
    })


def load_basis(directory, prefix):
    meta_path = os.path.join(directory, prefix + '.json')
    meta = fileutils.read_json(meta_path)
    vectors = fileutils.read_array(
        os.path.join(directory, prefix + '.vectors.bin'))
    sigma = fileutils.read_array(
        os.path.join(directory, prefix + '.sigma.bin'))
    shape = tuple(meta['dims'])
    if vectors.ndim != 2 or vectors.shape != (shape[0] * shape[1],
                                              meta['dim']):
        raise exceptions.LoadError(
            path=meta_path, reason=_("basis array does not match sidecar"))
    vectors.flags.writeable = False
    sigma.flags.writeable = False
    return PodBasis(vectors=vectors, singular_values=sigma, shape=shape,
                    threshold=meta['threshold'], level=meta['level'])
