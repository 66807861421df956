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
Irregular quadrangle geometry built from cubic Bezier curves.

The domain is bounded above by a cubic Bezier curve P1P4 and below by its
mirror image about the x-axis.  The two remaining sides are vertical
segments closing the quadrangle at ``x = x1`` and ``x = -x1``.

Node ordering follows the mesh convention used everywhere else: the first
mesh row (eta index 0) is the top curve, the last row is the bottom curve,
and xi runs along the curves from P1 (t = 0) to P4 (t = 1).  With x falling
along xi and y falling along eta the mapping Jacobian is positive.
"""

import collections
import dataclasses
import logging

import numpy as np

from curvirom import exceptions
from curvirom.i18n import _

LOG = logging.getLogger(__name__)

PARAM_NAMES = ('x1', 'y1', 'y2', 'y3', 'y4')

# Lower and upper bounds in mm.
DEFAULT_BOUNDS = collections.OrderedDict([
    ('x1', (100.0, 150.0)),
    ('y1', (10.0, 16.0)),
    ('y2', (0.0, 30.0)),
    ('y3', (20.0, 50.0)),
    ('y4', (25.0, 75.0)),
])

MAX_BINOMIAL_ORDER = 60


def check_bounds(bounds):
    """Return ``bounds`` as an ordered mapping after sanity checks."""
    bounds = collections.OrderedDict(
        (name, tuple(float(v) for v in bounds[name])) for name in PARAM_NAMES)
    for name, (lower, upper) in bounds.items():
        if not (np.isfinite(lower) and np.isfinite(upper)) or lower >= upper:
            raise exceptions.InputDomainError(
                reason=_("bounds for '%(name)s' must satisfy lower < upper, "
                         "got [%(lo)s, %(hi)s]") % {
                    'name': name, 'lo': lower, 'hi': upper})
    return bounds


@dataclasses.dataclass(frozen=True)
class GeometryParams(object):
    """The five design coordinates of the quadrangle, in mm."""

    x1: float
    y1: float
    y2: float
    y3: float
    y4: float

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(*(float(data[name]) for name in PARAM_NAMES))
        except KeyError as e:
            raise exceptions.DataError(
                reason=_("geometry record is missing %s") % e)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.size != len(PARAM_NAMES):
            raise exceptions.DataError(
                reason=_("expected %(n)d geometry values, got %(got)d") % {
                    'n': len(PARAM_NAMES), 'got': values.size})
        return cls(*(float(v) for v in values))

    def to_dict(self):
        return collections.OrderedDict(
            (name, getattr(self, name)) for name in PARAM_NAMES)

    def as_array(self):
        return np.array([getattr(self, name) for name in PARAM_NAMES])

    @property
    def x2(self):
        return self.x1 / 2.0

    @property
    def x3(self):
        return -self.x1 / 2.0

    @property
    def x4(self):
        return -self.x1

    def control_points(self):
        """Control points P1..P4 of the top curve."""
        return np.array([[self.x1, self.y1],
                         [self.x2, self.y2],
                         [self.x3, self.y3],
                         [self.x4, self.y4]])

    def out_of_range(self, bounds=None):
        """Names of the fields lying outside ``bounds``."""
        bounds = DEFAULT_BOUNDS if bounds is None else bounds
        return [name for name in PARAM_NAMES
                if not bounds[name][0] <= getattr(self, name) <=
                bounds[name][1]]

    def validate(self, bounds=None, strict=False):
        """Check finiteness and, in strict mode, the parameter bounds.

        Outside strict mode the bounds are advisory: the offending field
        names are returned and logged.
        """
        for name in PARAM_NAMES:
            if not np.isfinite(getattr(self, name)):
                raise exceptions.ValidationError(
                    field=name, value=getattr(self, name),
                    lower='-inf', upper='inf')
        if self.x1 <= 0:
            raise exceptions.ValidationError(
                field='x1', value=self.x1, lower=0.0, upper='inf')

        bounds = DEFAULT_BOUNDS if bounds is None else bounds
        outside = self.out_of_range(bounds)
        if outside and strict:
            name = outside[0]
            raise exceptions.ValidationError(
                field=name, value=getattr(self, name),
                lower=bounds[name][0], upper=bounds[name][1])
        return outside

    def normalized(self, bounds=None):
        """Map into the unit hypercube spanned by ``bounds``."""
        bounds = DEFAULT_BOUNDS if bounds is None else bounds
        lower = np.array([bounds[n][0] for n in PARAM_NAMES])
        upper = np.array([bounds[n][1] for n in PARAM_NAMES])
        return (self.as_array() - lower) / (upper - lower)


def binomial(n, i):
    """C(n, i) by the multiplicative recurrence."""
    if not 0 <= i <= n:
        raise exceptions.InputDomainError(
            reason=_("binomial index %(i)s outside [0, %(n)s]") % {
                'i': i, 'n': n})
    i = min(i, n - i)
    value = 1.0
    for k in range(1, i + 1):
        value = value * (n - i + k) / k
    return value


def _check_unit(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise exceptions.InputDomainError(
            reason=_("curve parameter must lie in [0, 1]"))
    return t


def bernstein(n, i, t):
    """Bernstein basis polynomial B_{n,i}(t)."""
    n = int(n)
    i = int(i)
    if n < 0 or n > MAX_BINOMIAL_ORDER:
        raise exceptions.InputDomainError(
            reason=_("Bernstein order %(n)s outside [0, %(max)s]") % {
                'n': n, 'max': MAX_BINOMIAL_ORDER})
    if not 0 <= i <= n:
        raise exceptions.InputDomainError(
            reason=_("Bernstein index %(i)s outside [0, %(n)s]") % {
                'i': i, 'n': n})
    t = _check_unit(t)
    # 0 ** 0 is 1 in numpy, which gives the exact endpoint values.
    weight = binomial(n, i) * t ** i * (1.0 - t) ** (n - i)
    if weight.ndim == 0:
        return float(weight)
    return weight


class BezierCurve(object):
    """Bezier curve of order ``len(control_points) - 1``."""

    def __init__(self, control_points):
        points = np.array(control_points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 2:
            raise exceptions.ConstructionError(
                what=_("Bezier curve"),
                reason=_("need at least 2 control points of shape (2,)"))
        if not np.all(np.isfinite(points)):
            raise exceptions.ConstructionError(
                what=_("Bezier curve"),
                reason=_("control points must be finite"))
        if len(points) - 1 > MAX_BINOMIAL_ORDER:
            raise exceptions.ConstructionError(
                what=_("Bezier curve"),
                reason=_("order above %d") % MAX_BINOMIAL_ORDER)
        points.flags.writeable = False
        self.control_points = points

    @property
    def order(self):
        return len(self.control_points) - 1

    def basis(self, t):
        """Matrix of Bernstein weights, shape ``(len(t), order + 1)``."""
        t = np.atleast_1d(_check_unit(t))
        n = self.order
        return np.column_stack([bernstein(n, i, t) for i in range(n + 1)])

    def evaluate(self, t):
        """Points on the curve for every parameter in ``t``."""
        scalar = np.ndim(t) == 0
        points = self.basis(t).dot(self.control_points)
        if scalar:
            points = points[0]
            # Exact endpoints; the weights are exact but the dot product
            # may still round.
            if t == 0:
                return self.control_points[0].copy()
            if t == 1:
                return self.control_points[-1].copy()
            return points
        points[np.asarray(t) == 0] = self.control_points[0]
        points[np.asarray(t) == 1] = self.control_points[-1]
        return points

    def __repr__(self):
        return '<BezierCurve order=%d>' % self.order


def bezier_eval(curve, t):
    return curve.evaluate(t)


@dataclasses.dataclass(frozen=True)
class DomainBoundary(object):
    """Node polylines of the four sides, each an ``(n, 2)`` array.

    ``top`` and ``bottom`` run along xi (``n_xi`` nodes); ``left`` and
    ``right`` run along eta from the top curve to the bottom curve
    (``n_eta`` nodes).
    """

    top: np.ndarray
    bottom: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        for side in ('top', 'bottom', 'left', 'right'):
            poly = np.asarray(getattr(self, side), dtype=float)
            if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
                raise exceptions.ConstructionError(
                    what=_("domain boundary"),
                    reason=_("side '%s' needs at least 3 nodes of shape "
                             "(2,)") % side)
            poly.flags.writeable = False
            object.__setattr__(self, side, poly)
        if len(self.top) != len(self.bottom):
            raise exceptions.ConstructionError(
                what=_("domain boundary"),
                reason=_("top and bottom node counts differ"))
        if len(self.left) != len(self.right):
            raise exceptions.ConstructionError(
                what=_("domain boundary"),
                reason=_("left and right node counts differ"))
        corners = ((self.top[0], self.left[0]),
                   (self.bottom[0], self.left[-1]),
                   (self.top[-1], self.right[0]),
                   (self.bottom[-1], self.right[-1]))
        for a, b in corners:
            if not np.array_equal(a, b):
                raise exceptions.ConstructionError(
                    what=_("domain boundary"),
                    reason=_("corner nodes of adjacent sides differ"))

    @property
    def n_xi(self):
        return len(self.top)

    @property
    def n_eta(self):
        return len(self.left)


def _segment(start, end, count):
    s = np.linspace(0.0, 1.0, count)[:, None]
    nodes = (1.0 - s) * start + s * end
    nodes[0] = start
    nodes[-1] = end
    return nodes


def build_boundary(params, n_xi, n_eta, bounds=None, strict=False):
    """Discretize the domain boundary described by ``params``.

    The top curve is sampled at ``n_xi`` uniformly spaced curve parameters,
    the bottom curve is its exact mirror and the straight sides carry
    ``n_eta`` uniformly spaced nodes.
    """
    n_xi = int(n_xi)
    n_eta = int(n_eta)
    if n_xi < 3 or n_eta < 3:
        raise exceptions.InputDomainError(
            reason=_("boundary needs n_xi >= 3 and n_eta >= 3, got "
                     "%(xi)d and %(eta)d") % {'xi': n_xi, 'eta': n_eta})
    outside = params.validate(bounds=bounds, strict=strict)
    if outside:
        LOG.debug("Geometry %s outside bounds in %s", params.to_dict(),
                  outside)

    curve = BezierCurve(params.control_points())
    top = curve.evaluate(np.linspace(0.0, 1.0, n_xi))
    bottom = np.column_stack([top[:, 0], -top[:, 1]])
    left = _segment(top[0], bottom[0], n_eta)
    right = _segment(top[-1], bottom[-1], n_eta)
    return DomainBoundary(top=top, bottom=bottom, left=left, right=right)
