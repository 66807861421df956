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
Body-fitted structured meshes from elliptic grid generation.

The interior node positions solve the interchanged Laplace equations

    alpha * x_xixi - 2 * beta * x_xieta + gamma * x_etaeta = 0

(and the same for ``y``) with the boundary nodes held fixed.  The solve
starts from transfinite interpolation and runs Picard-linearized SOR
sweeps until the mean absolute residual drops below the tolerance.
"""

import dataclasses
import logging
import time

import numpy as np

from curvirom import exceptions
from curvirom import geometry
from curvirom.i18n import _
from curvirom import stencils

LOG = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50000
DEFAULT_OMEGA = 1.5
DEFAULT_SWEEP_ORDER = 'eta-xi'


def _readonly(values):
    values = np.array(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclasses.dataclass(frozen=True, eq=False)
class StructuredMesh(object):
    """Node coordinates (mm) indexed ``[eta][xi]``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _readonly(self.x)
        y = _readonly(self.y)
        if x.ndim != 2 or x.shape != y.shape:
            raise exceptions.ConstructionError(
                what=_("structured mesh"),
                reason=_("x and y must be 2D arrays of equal shape, got "
                         "%(x)s and %(y)s") % {'x': x.shape, 'y': y.shape})
        if min(x.shape) < 2:
            raise exceptions.ConstructionError(
                what=_("structured mesh"),
                reason=_("need at least 2 nodes per direction"))
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)

    @property
    def nx_eta(self):
        return self.x.shape[0]

    @property
    def nx_xi(self):
        return self.x.shape[1]

    @property
    def shape(self):
        return self.x.shape

    def is_finite(self):
        return bool(np.all(np.isfinite(self.x)) and
                    np.all(np.isfinite(self.y)))

    @classmethod
    def from_boundary(cls, boundary):
        """Transfinite-interpolation mesh spanning ``boundary``."""
        return init_mesh_tfi(boundary)

    def boundary(self):
        """The four sides as a :class:`geometry.DomainBoundary`."""
        pts = np.stack([self.x, self.y], axis=-1)
        return geometry.DomainBoundary(top=pts[0], bottom=pts[-1],
                                       left=pts[:, 0], right=pts[:, -1])

    def boundary_rows(self):
        """Copies of the top, bottom, left and right node rows."""
        pts = np.stack([self.x, self.y], axis=-1)
        return (pts[0].copy(), pts[-1].copy(), pts[:, 0].copy(),
                pts[:, -1].copy())

    def __eq__(self, other):
        if not isinstance(other, StructuredMesh):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and
                np.array_equal(self.y, other.y))

    __hash__ = None


@dataclasses.dataclass(frozen=True)
class MetricCoeffs(object):
    alpha: float
    beta: float
    gamma: float


@dataclasses.dataclass(frozen=True, eq=False)
class MeshResidualReport(object):
    res_x: np.ndarray
    res_y: np.ndarray
    loss: float


@dataclasses.dataclass(frozen=True)
class MeshComparison(object):
    mae: float
    mre_x: float
    mre_y: float


def _require_interior(mesh):
    if mesh.nx_eta < 3 or mesh.nx_xi < 3:
        raise exceptions.InputDomainError(
            reason=_("mesh needs at least 3x3 nodes, got %s") %
            (mesh.shape,))


def _require_finite(mesh):
    if not mesh.is_finite():
        raise exceptions.DataError(
            reason=_("mesh has non-finite coordinates"))


def metric_coeffs(mesh, i, j):
    """Central-difference alpha, beta, gamma at interior node (i, j)."""
    if not (1 <= i <= mesh.nx_eta - 2 and 1 <= j <= mesh.nx_xi - 2):
        raise exceptions.IndexDomainError(i=i, j=j, n_eta=mesh.nx_eta,
                                          n_xi=mesh.nx_xi)
    x, y = mesh.x, mesh.y
    x_xi = (x[i, j + 1] - x[i, j - 1]) / 2.0
    y_xi = (y[i, j + 1] - y[i, j - 1]) / 2.0
    x_eta = (x[i + 1, j] - x[i - 1, j]) / 2.0
    y_eta = (y[i + 1, j] - y[i - 1, j]) / 2.0
    return MetricCoeffs(alpha=float(x_eta ** 2 + y_eta ** 2),
                        beta=float(x_xi * x_eta + y_xi * y_eta),
                        gamma=float(x_xi ** 2 + y_xi ** 2))


def mesh_residual(mesh):
    """Residual of the grid equations and its mean-absolute loss."""
    _require_interior(mesh)
    _require_finite(mesh)
    alpha, beta, gamma = stencils.metric_fields(mesh.x, mesh.y)
    res_x = stencils.apply_operator(mesh.x, alpha, beta, gamma)
    res_y = stencils.apply_operator(mesh.y, alpha, beta, gamma)
    loss = stencils.mean_abs(res_x) + stencils.mean_abs(res_y)
    return MeshResidualReport(res_x=res_x, res_y=res_y, loss=loss)


def init_mesh_tfi(boundary):
    """Transfinite (Coons) interpolation of the four boundary polylines."""
    top = np.asarray(boundary.top, dtype=float)
    bottom = np.asarray(boundary.bottom, dtype=float)
    left = np.asarray(boundary.left, dtype=float)
    right = np.asarray(boundary.right, dtype=float)
    if len(top) != len(bottom) or len(left) != len(right):
        raise exceptions.ConstructionError(
            what=_("transfinite mesh"),
            reason=_("opposite sides have different node counts"))
    n_xi = len(top)
    n_eta = len(left)

    u = np.linspace(0.0, 1.0, n_xi)[None, :, None]
    v = np.linspace(0.0, 1.0, n_eta)[:, None, None]
    pts = ((1.0 - v) * top[None, :, :] + v * bottom[None, :, :] +
           (1.0 - u) * left[:, None, :] + u * right[:, None, :] -
           ((1.0 - u) * (1.0 - v) * top[0] + u * (1.0 - v) * top[-1] +
            (1.0 - u) * v * bottom[0] + u * v * bottom[-1]))

    # Boundary nodes are copied, not interpolated.
    pts[0] = top
    pts[-1] = bottom
    pts[:, 0] = left
    pts[:, -1] = right
    return StructuredMesh(x=pts[..., 0], y=pts[..., 1])


def jacobian_min(mesh):
    """Smallest central-difference Jacobian over the interior nodes."""
    _require_interior(mesh)
    _require_finite(mesh)
    return float(np.min(stencils.jacobian_field(mesh.x, mesh.y)))


def relax_mesh(mesh, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               omega=DEFAULT_OMEGA, sweep_order=DEFAULT_SWEEP_ORDER):
    """Relax the interior nodes until the grid-equation loss is <= tol.

    Boundary nodes are never touched.  Raises
    :class:`exceptions.ConvergenceError` when ``max_iter`` sweeps are not
    enough and :class:`exceptions.MeshFoldingError` when the converged
    mesh has a non-positive Jacobian.

    The loss is not scaled by the mesh size, so it levels off at a
    rounding floor of roughly ``eps * max|x| * max(alpha, gamma)``.  For
    meshes spanning a few hundred mm that floor sits near 1e-11 to 1e-10;
    a smaller ``tol`` cannot be met and ends in ``ConvergenceError``.
    """
    if not 0.0 < omega < 2.0:
        raise exceptions.InputDomainError(
            reason=_("relaxation factor must lie in (0, 2), got %s") % omega)
    if not tol > 0.0:
        raise exceptions.InputDomainError(
            reason=_("tolerance must be positive, got %s") % tol)
    try:
        order = stencils.SWEEP_ORDERS[sweep_order]
    except KeyError:
        raise exceptions.InputDomainError(
            reason=_("unknown sweep order '%s'") % sweep_order)

    loss = mesh_residual(mesh).loss
    initial_loss = loss
    iterations = 0
    start = time.time()
    if loss > tol:
        x = np.array(mesh.x)
        y = np.array(mesh.y)
        while loss > tol:
            if iterations >= max_iter:
                raise exceptions.ConvergenceError(
                    what=_("Mesh relaxation"), iterations=iterations,
                    last_loss=loss, tol=tol)
            stencils.mesh_sweep(x, y, omega, order)
            iterations += 1
            alpha, beta, gamma = stencils.metric_fields(x, y)
            loss = (stencils.mean_abs(stencils.apply_operator(
                x, alpha, beta, gamma)) +
                stencils.mean_abs(stencils.apply_operator(
                    y, alpha, beta, gamma)))
            if not np.isfinite(loss):
                raise exceptions.ConvergenceError(
                    what=_("Mesh relaxation"), iterations=iterations,
                    last_loss=loss, tol=tol)
        mesh = StructuredMesh(x=x, y=y)

    LOG.debug("Relaxed %s mesh in %d sweeps (%.2fs): loss %.3e -> %.3e",
              'x'.join(map(str, mesh.shape)), iterations,
              time.time() - start, initial_loss, loss)

    jmin = jacobian_min(mesh)
    if jmin <= 0.0:
        raise exceptions.MeshFoldingError(jacobian_min=jmin)
    return mesh


def generate_mesh(params, n_eta, n_xi, tol=DEFAULT_TOL,
                  max_iter=DEFAULT_MAX_ITER, omega=DEFAULT_OMEGA,
                  sweep_order=DEFAULT_SWEEP_ORDER, bounds=None,
                  strict=False):
    """Boundary, transfinite start and elliptic relaxation in one call."""
    boundary = geometry.build_boundary(params, n_xi, n_eta, bounds=bounds,
                                       strict=strict)
    return relax_mesh(init_mesh_tfi(boundary), tol=tol, max_iter=max_iter,
                      omega=omega, sweep_order=sweep_order)


def compare_meshes(predicted, reference):
    """Coordinate errors of ``predicted`` against ``reference``."""
    if predicted.shape != reference.shape:
        raise exceptions.DataError(
            reason=_("mesh shapes differ: %(a)s vs %(b)s") % {
                'a': predicted.shape, 'b': reference.shape})
    dx = np.abs(predicted.x - reference.x)
    dy = np.abs(predicted.y - reference.y)
    span_x = float(np.ptp(reference.x)) or 1.0
    span_y = float(np.ptp(reference.y)) or 1.0
    return MeshComparison(mae=float((dx.mean() + dy.mean()) / 2.0),
                          mre_x=float(dx.mean() / span_x),
                          mre_y=float(dy.mean() / span_y))


def mesh_quality(mesh):
    """Loss, Jacobian range and worst grid-line skewness."""
    report = mesh_residual(mesh)
    alpha, beta, gamma = stencils.metric_fields(mesh.x, mesh.y)
    jac = stencils.jacobian_field(mesh.x, mesh.y)
    denom = np.sqrt(alpha * gamma)
    skew = np.divide(np.abs(beta), denom, out=np.zeros_like(beta),
                     where=denom > 0)
    return {
        'dims': mesh.shape,
        'loss': report.loss,
        'jacobian_min': float(jac.min()),
        'jacobian_max': float(jac.max()),
        'skewness_max': float(skew.max()),
    }
