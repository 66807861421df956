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
Ground-truth steady temperature on a body-fitted mesh.

Because xi and eta are harmonic in the physical plane, the Laplace equation
for the temperature maps to

    alpha * T_xixi - 2 * beta * T_xieta + gamma * T_etaeta = 0

on the computational plane, i.e. the same operator as the grid equations
with the metric coefficients of the (fixed) mesh.  Dirichlet values are
applied on all four sides and the interior is relaxed with SOR.
"""

import dataclasses
import logging

import numpy as np

from curvirom import exceptions
from curvirom.i18n import _
from curvirom.i18n import _LW
from curvirom import meshgen
from curvirom import stencils

LOG = logging.getLogger(__name__)

DEFAULT_TOP = 350.0
DEFAULT_BOTTOM = 300.0
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200000
DEFAULT_OMEGA = 1.8

BLEND = 'blend'


@dataclasses.dataclass(frozen=True, eq=False)
class ScalarField(object):
    """Node values indexed ``[eta][xi]`` tagged with a hierarchy level."""

    values: np.ndarray
    level: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise exceptions.DataError(
                reason=_("field must be 2D, got shape %s") % (values.shape,))
        if not np.all(np.isfinite(values)):
            raise exceptions.DataError(
                reason=_("field has non-finite values"))
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'level', int(self.level))

    @property
    def shape(self):
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return (self.level == other.level and
                np.array_equal(self.values, other.values))

    __hash__ = None


class BoundaryData(object):
    """Dirichlet data that can be laid onto a mesh."""

    def apply(self, mesh):
        """Return an array shaped like the mesh with boundary values set.

        Interior entries are zero.
        """
        raise NotImplementedError()

    def __add__(self, other):
        if not isinstance(other, BoundaryData):
            return NotImplemented
        return _SumBoundary(self, other)

    def scaled(self, factor):
        return _ScaledBoundary(self, factor)


class _SumBoundary(BoundaryData):

    def __init__(self, first, second):
        self.first = first
        self.second = second

    def apply(self, mesh):
        return self.first.apply(mesh) + self.second.apply(mesh)


class _ScaledBoundary(BoundaryData):

    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)

    def apply(self, mesh):
        return self.factor * self.base.apply(mesh)


def _check_mode(mode, side):
    if mode == BLEND:
        return mode
    try:
        value = float(mode)
    except (TypeError, ValueError):
        raise exceptions.InputDomainError(
            reason=_("%(side)s side mode must be '%(blend)s' or a "
                     "temperature, got %(mode)r") % {
                'side': side, 'blend': BLEND, 'mode': mode})
    if not np.isfinite(value):
        raise exceptions.InputDomainError(
            reason=_("%s side temperature must be finite") % side)
    return value


@dataclasses.dataclass(frozen=True)
class BoundaryConditions(BoundaryData):
    """Curve temperatures and straight-side modes, in K.

    The corners belong to the curves.  A side in ``'blend'`` mode varies
    linearly in its node index between the two corner temperatures; a
    numeric side mode holds that temperature on the side's inner nodes.

    With both sides blended every boundary value is affine in the eta
    index, so the solution is that same affine profile on any mesh and
    does not depend on the geometry.  Pin at least one side (for example
    ``left_mode=320``) when the field has to vary between geometries.
    """

    top_value: float = DEFAULT_TOP
    bottom_value: float = DEFAULT_BOTTOM
    left_mode: object = BLEND
    right_mode: object = BLEND

    def __post_init__(self):
        for name in ('top_value', 'bottom_value'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise exceptions.InputDomainError(
                    reason=_("%s must be finite") % name)
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'left_mode',
                           _check_mode(self.left_mode, 'left'))
        object.__setattr__(self, 'right_mode',
                           _check_mode(self.right_mode, 'right'))

    @classmethod
    def from_dict(cls, data):
        return cls(top_value=data.get('top_value', DEFAULT_TOP),
                   bottom_value=data.get('bottom_value', DEFAULT_BOTTOM),
                   left_mode=data.get('left_mode', BLEND),
                   right_mode=data.get('right_mode', BLEND))

    @classmethod
    def from_config(cls, config):
        """Build from a run configuration or any mapping of its keys."""
        if not hasattr(config, 'get'):
            config = config.to_dict()
        return cls.from_dict(config)

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def span(self):
        values = [self.top_value, self.bottom_value]
        values.extend(m for m in (self.left_mode, self.right_mode)
                      if m != BLEND)
        return max(values) - min(values)

    def _side(self, mode, n_eta):
        if mode == BLEND:
            return np.linspace(self.top_value, self.bottom_value, n_eta)
        side = np.full(n_eta, mode)
        side[0] = self.top_value
        side[-1] = self.bottom_value
        return side

    def apply(self, mesh):
        n_eta, n_xi = mesh.shape
        values = np.zeros((n_eta, n_xi))
        values[:, 0] = self._side(self.left_mode, n_eta)
        values[:, -1] = self._side(self.right_mode, n_eta)
        values[0, :] = self.top_value
        values[-1, :] = self.bottom_value
        return values


class FunctionBoundary(BoundaryData):
    """Boundary values sampled from ``func(x, y)`` at the boundary nodes."""

    def __init__(self, func):
        self.func = func

    def apply(self, mesh):
        sampled = np.asarray(self.func(mesh.x, mesh.y), dtype=float)
        sampled = np.broadcast_to(sampled, mesh.shape)
        values = np.zeros(mesh.shape)
        values[0, :] = sampled[0, :]
        values[-1, :] = sampled[-1, :]
        values[:, 0] = sampled[:, 0]
        values[:, -1] = sampled[:, -1]
        return values


def _interpolate_interior(values):
    """Seed the interior by transfinite interpolation of the boundary."""
    n_eta, n_xi = values.shape
    u = np.linspace(0.0, 1.0, n_xi)[None, :]
    v = np.linspace(0.0, 1.0, n_eta)[:, None]
    top, bottom = values[0], values[-1]
    left, right = values[:, 0], values[:, -1]
    seeded = ((1.0 - v) * top[None, :] + v * bottom[None, :] +
              (1.0 - u) * left[:, None] + u * right[:, None] -
              ((1.0 - u) * (1.0 - v) * top[0] + u * (1.0 - v) * top[-1] +
               (1.0 - u) * v * bottom[0] + u * v * bottom[-1]))
    result = values.copy()
    result[1:-1, 1:-1] = seeded[1:-1, 1:-1]
    return result


def field_residual(mesh, field):
    """Mean absolute transformed-Laplacian stencil over interior nodes."""
    values = field.values if isinstance(field, ScalarField) else \
        np.asarray(field, dtype=float)
    if values.shape != mesh.shape:
        raise exceptions.DataError(
            reason=_("field shape %(f)s does not match mesh %(m)s") % {
                'f': values.shape, 'm': mesh.shape})
    alpha, beta, gamma = stencils.metric_fields(mesh.x, mesh.y)
    return stencils.mean_abs(
        stencils.apply_operator(values, alpha, beta, gamma))


def solve_laplace(mesh, bc=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                  omega=DEFAULT_OMEGA, level=0):
    """Solve the transformed Laplace equation with Dirichlet data ``bc``.

    :returns: :class:`ScalarField` tagged with ``level``.
    """
    bc = BoundaryConditions() if bc is None else bc
    if not tol > 0.0:
        raise exceptions.InputDomainError(
            reason=_("tolerance must be positive, got %s") % tol)
    if not 0.0 < omega < 2.0:
        raise exceptions.InputDomainError(
            reason=_("relaxation factor must lie in (0, 2), got %s") % omega)
    jmin = meshgen.jacobian_min(mesh)
    if jmin <= 0.0:
        raise exceptions.MeshFoldingError(jacobian_min=jmin)

    values = _interpolate_interior(bc.apply(mesh))
    alpha, beta, gamma = stencils.metric_fields(mesh.x, mesh.y)
    alpha = np.ascontiguousarray(alpha)
    beta = np.ascontiguousarray(beta)
    gamma = np.ascontiguousarray(gamma)

    residual = stencils.mean_abs(
        stencils.apply_operator(values, alpha, beta, gamma))
    iterations = 0
    while residual > tol:
        if iterations >= max_iter:
            raise exceptions.ConvergenceError(
                what=_("Temperature solve"), iterations=iterations,
                last_loss=residual, tol=tol)
        stencils.sor_sweep(values, alpha, beta, gamma, omega,
                           stencils.ORDER_ETA_XI)
        iterations += 1
        residual = stencils.mean_abs(
            stencils.apply_operator(values, alpha, beta, gamma))
        if not np.isfinite(residual):
            raise exceptions.ConvergenceError(
                what=_("Temperature solve"), iterations=iterations,
                last_loss=residual, tol=tol)

    LOG.debug("Temperature solve on %s mesh: %d sweeps, residual %.3e",
              'x'.join(map(str, mesh.shape)), iterations, residual)
    field = ScalarField(values=values, level=level)
    check_maximum_principle(field)
    return field


def check_maximum_principle(field, atol=1e-10):
    """True when interior values stay within the boundary range.

    Strongly sheared meshes can break the discrete principle; that is
    logged, not raised.
    """
    values = field.values
    edge = np.concatenate([values[0], values[-1], values[1:-1, 0],
                           values[1:-1, -1]])
    interior = values[1:-1, 1:-1]
    if interior.size == 0:
        return True
    low, high = edge.min() - atol, edge.max() + atol
    ok = bool(interior.min() >= low and interior.max() <= high)
    if not ok:
        LOG.warning(_LW("Discrete maximum principle violated: interior "
                        "range [%(lo).6g, %(hi).6g] exceeds boundary range "
                        "[%(blo).6g, %(bhi).6g]"),
                    {'lo': interior.min(), 'hi': interior.max(),
                     'blo': edge.min(), 'bhi': edge.max()})
    return ok
