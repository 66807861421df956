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
Central-difference stencils on the computational plane.

Arrays are indexed ``[eta][xi]`` with unit index spacing.  For a scalar
``u`` and metric coefficients ``alpha``, ``beta``, ``gamma`` the operator is

    alpha * u_xixi - 2 * beta * u_xieta + gamma * u_etaeta

with ``u_xixi`` taken along axis 1, ``u_etaeta`` along axis 0 and the
four-corner cross difference.  The metric arrays cover interior nodes only
(shape ``(n_eta - 2, n_xi - 2)``).

The sweep kernels are compiled with numba; Gauss-Seidel ordering is part
of their contract, so they must not be parallelized.
"""

import numba
import numpy as np

ORDER_ETA_XI = 0
ORDER_XI_ETA = 1

SWEEP_ORDERS = {'eta-xi': ORDER_ETA_XI, 'xi-eta': ORDER_XI_ETA}


def first_differences(u):
    """Central first differences ``(u_xi, u_eta)`` at interior nodes."""
    u_xi = (u[1:-1, 2:] - u[1:-1, :-2]) / 2.0
    u_eta = (u[2:, 1:-1] - u[:-2, 1:-1]) / 2.0
    return u_xi, u_eta


def second_differences(u):
    """``(u_xixi, u_xieta, u_etaeta)`` at interior nodes."""
    centre = u[1:-1, 1:-1]
    u_xixi = u[1:-1, 2:] + u[1:-1, :-2] - 2.0 * centre
    u_etaeta = u[2:, 1:-1] + u[:-2, 1:-1] - 2.0 * centre
    u_xieta = (u[2:, 2:] + u[:-2, :-2] - u[2:, :-2] - u[:-2, 2:]) / 4.0
    return u_xixi, u_xieta, u_etaeta


def metric_fields(x, y):
    """alpha, beta, gamma at every interior node."""
    x_xi, x_eta = first_differences(x)
    y_xi, y_eta = first_differences(y)
    alpha = x_eta ** 2 + y_eta ** 2
    beta = x_xi * x_eta + y_xi * y_eta
    gamma = x_xi ** 2 + y_xi ** 2
    return alpha, beta, gamma


def jacobian_field(x, y):
    x_xi, x_eta = first_differences(x)
    y_xi, y_eta = first_differences(y)
    return x_xi * y_eta - x_eta * y_xi


def apply_operator(u, alpha, beta, gamma):
    """The transformed Laplacian of ``u`` at interior nodes."""
    u_xixi, u_xieta, u_etaeta = second_differences(u)
    return alpha * u_xixi - 2.0 * beta * u_xieta + gamma * u_etaeta


@numba.njit(cache=True)
def _relax_node(u, i, j, a, b, g, omega):
    diag = 2.0 * (a + g)
    if diag <= 0.0:
        return 0.0
    cross = (u[i + 1, j + 1] + u[i - 1, j - 1]
             - u[i + 1, j - 1] - u[i - 1, j + 1]) / 4.0
    target = (a * (u[i, j + 1] + u[i, j - 1])
              + g * (u[i + 1, j] + u[i - 1, j])
              - 2.0 * b * cross) / diag
    delta = omega * (target - u[i, j])
    u[i, j] += delta
    return abs(delta)


@numba.njit(cache=True)
def sor_sweep(u, alpha, beta, gamma, omega, order):
    """One in-place SOR sweep over the interior of ``u``.

    Returns the largest absolute node update.
    """
    n_eta, n_xi = u.shape
    biggest = 0.0
    if order == 0:
        for i in range(1, n_eta - 1):
            for j in range(1, n_xi - 1):
                d = _relax_node(u, i, j, alpha[i - 1, j - 1],
                                beta[i - 1, j - 1], gamma[i - 1, j - 1],
                                omega)
                if d > biggest:
                    biggest = d
    else:
        for j in range(1, n_xi - 1):
            for i in range(1, n_eta - 1):
                d = _relax_node(u, i, j, alpha[i - 1, j - 1],
                                beta[i - 1, j - 1], gamma[i - 1, j - 1],
                                omega)
                if d > biggest:
                    biggest = d
    return biggest


@numba.njit(cache=True)
def mesh_sweep(x, y, omega, order):
    """One Picard-SOR sweep of the elliptic grid equations.

    The metric coefficients are computed once from the current iterate
    and held fixed while both coordinate arrays are relaxed in place.
    """
    n_eta, n_xi = x.shape
    alpha = np.empty((n_eta - 2, n_xi - 2))
    beta = np.empty((n_eta - 2, n_xi - 2))
    gamma = np.empty((n_eta - 2, n_xi - 2))
    for i in range(1, n_eta - 1):
        for j in range(1, n_xi - 1):
            x_xi = (x[i, j + 1] - x[i, j - 1]) / 2.0
            y_xi = (y[i, j + 1] - y[i, j - 1]) / 2.0
            x_eta = (x[i + 1, j] - x[i - 1, j]) / 2.0
            y_eta = (y[i + 1, j] - y[i - 1, j]) / 2.0
            alpha[i - 1, j - 1] = x_eta * x_eta + y_eta * y_eta
            beta[i - 1, j - 1] = x_xi * x_eta + y_xi * y_eta
            gamma[i - 1, j - 1] = x_xi * x_xi + y_xi * y_xi
    dx = sor_sweep(x, alpha, beta, gamma, omega, order)
    dy = sor_sweep(y, alpha, beta, gamma, omega, order)
    return max(dx, dy)


def mean_abs(values):
    if values.size == 0:
        return 0.0
    return float(np.mean(np.abs(values)))
