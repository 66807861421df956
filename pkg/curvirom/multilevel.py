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
Nested mesh hierarchy and the telescoping level decomposition.

Level ``l`` (0-based, coarsest first) has ``base * 2**l`` nodes in each
direction.  Those node sets do not nest node-on-node, so the coarse-to-fine
transfer interpolates bilinearly in normalized computational coordinates
``u = i / (n_eta - 1)``, ``v = j / (n_xi - 1)``.

A list of per-level solutions ``v_0 .. v_{L-1}`` is stored as
``tilde_v[0] = v_0`` and ``tilde_v[l] = v_l - P(v_{l-1})``; summing the
prolongated parts back up recovers the finest solution.
"""

import dataclasses
import logging

import numpy as np

from curvirom import exceptions
from curvirom.i18n import _
from curvirom import meshgen
from curvirom import thermal_fd

LOG = logging.getLogger(__name__)


def level_dims(base_dims, levels):
    """Node counts of every level, coarsest first."""
    n_eta, n_xi = (int(d) for d in base_dims)
    if levels < 1:
        raise exceptions.InputDomainError(
            reason=_("hierarchy needs at least one level, got %s") % levels)
    if n_eta < 3 or n_xi < 3:
        raise exceptions.InputDomainError(
            reason=_("base dimensions must be at least 3x3, got %s") %
            ((n_eta, n_xi),))
    return [(n_eta * 2 ** l, n_xi * 2 ** l) for l in range(int(levels))]


@dataclasses.dataclass(frozen=True)
class MeshHierarchy(object):
    """Relaxed meshes of one geometry, coarsest first."""

    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, 'levels', tuple(self.levels))
        if not self.levels:
            raise exceptions.ConstructionError(
                what=_("mesh hierarchy"), reason=_("no levels"))

    @property
    def L(self):
        return len(self.levels)

    @property
    def dims(self):
        return [mesh.shape for mesh in self.levels]

    @property
    def finest(self):
        return self.levels[-1]


def build_hierarchy(params, levels, base_dims, **mesh_opts):
    """Relax one mesh per level for ``params``.

    ``mesh_opts`` are passed to :func:`meshgen.generate_mesh`.  A failing
    level is reported as :class:`exceptions.LevelError` chained to the
    original error.
    """
    meshes = []
    for level, (n_eta, n_xi) in enumerate(level_dims(base_dims, levels)):
        try:
            mesh = meshgen.generate_mesh(params, n_eta, n_xi, **mesh_opts)
        except exceptions.CurviromException as e:
            raise exceptions.LevelError(level=level, reason=e) from e
        meshes.append(mesh)
    return MeshHierarchy(levels=meshes)


def solve_levels(hierarchy, bc=None, **solve_opts):
    """A fresh finite-difference solve on every level's own mesh."""
    solutions = []
    for level, mesh in enumerate(hierarchy.levels):
        try:
            solutions.append(thermal_fd.solve_laplace(
                mesh, bc, level=level, **solve_opts))
        except exceptions.CurviromException as e:
            raise exceptions.LevelError(level=level, reason=e) from e
    return solutions


def interpolation_matrix(n_from, n_to):
    """Linear interpolation from ``n_from`` to ``n_to`` equispaced nodes."""
    if n_from == n_to:
        return np.eye(n_to)
    pos = np.arange(n_to) * (n_from - 1) / float(n_to - 1)
    lower = np.minimum(np.floor(pos).astype(int), n_from - 2)
    weight = pos - lower
    matrix = np.zeros((n_to, n_from))
    rows = np.arange(n_to)
    matrix[rows, lower] = 1.0 - weight
    matrix[rows, lower + 1] += weight
    return matrix


def _values(field):
    if isinstance(field, thermal_fd.ScalarField):
        return field.values, field.level
    return np.asarray(field, dtype=float), 0


def prolongate(field, to_dims):
    """Bilinear coarse-to-fine transfer.

    Corner values are reproduced exactly.
    """
    values, level = _values(field)
    n_eta, n_xi = (int(d) for d in to_dims)
    if n_eta < values.shape[0] or n_xi < values.shape[1]:
        raise exceptions.InputDomainError(
            reason=_("cannot prolongate %(src)s onto smaller %(dst)s") % {
                'src': values.shape, 'dst': (n_eta, n_xi)})
    if min(values.shape) < 2:
        raise exceptions.InputDomainError(
            reason=_("field needs at least 2x2 nodes to interpolate"))
    fine = interpolation_matrix(values.shape[0], n_eta).dot(values).dot(
        interpolation_matrix(values.shape[1], n_xi).T)
    return thermal_fd.ScalarField(values=fine, level=level)


@dataclasses.dataclass(frozen=True)
class LevelDecomposition(object):
    tilde_v: tuple

    def __post_init__(self):
        object.__setattr__(self, 'tilde_v', tuple(self.tilde_v))
        if not self.tilde_v:
            raise exceptions.DataError(reason=_("empty decomposition"))

    @property
    def L(self):
        return len(self.tilde_v)

    @property
    def dims(self):
        return [f.shape for f in self.tilde_v]


def _check_chain(shapes, hierarchy=None):
    if hierarchy is not None and list(shapes) != hierarchy.dims:
        raise exceptions.DataError(
            reason=_("level shapes %(got)s do not match hierarchy "
                     "%(want)s") % {'got': list(shapes),
                                    'want': hierarchy.dims})
    for coarse, fine in zip(shapes, shapes[1:]):
        if fine[0] < coarse[0] or fine[1] < coarse[1]:
            raise exceptions.DataError(
                reason=_("level shapes must not shrink: %(a)s then "
                         "%(b)s") % {'a': coarse, 'b': fine})


def decompose(solutions, hierarchy=None):
    """Split per-level solutions into the telescoping parts."""
    solutions = list(solutions)
    if not solutions:
        raise exceptions.DataError(reason=_("no level solutions"))
    _check_chain([s.shape for s in solutions], hierarchy)
    parts = [thermal_fd.ScalarField(values=solutions[0].values, level=0)]
    for level in range(1, len(solutions)):
        fine = solutions[level]
        coarse = prolongate(solutions[level - 1], fine.shape)
        parts.append(thermal_fd.ScalarField(
            values=fine.values - coarse.values, level=level))
    return LevelDecomposition(tilde_v=parts)


def recompose(dec):
    """Accumulate the parts coarsest-first into the finest-level field."""
    _check_chain(dec.dims)
    acc = dec.tilde_v[0].values
    for part in dec.tilde_v[1:]:
        acc = prolongate(acc, part.shape).values + part.values
    return thermal_fd.ScalarField(values=acc, level=dec.L - 1)
