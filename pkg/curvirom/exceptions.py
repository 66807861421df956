# Copyright 2010 Jacob Kaplan-Moss
#
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
Exception definitions.
"""

from curvirom.i18n import _


class CurviromException(Exception):
    """
    The base exception class for all exceptions this library raises.

    Subclasses declare ``msg_fmt``; keyword arguments given to the
    constructor are interpolated into it and kept as attributes.
    """
    msg_fmt = _("An unknown error occurred.")

    def __init__(self, message=None, **kwargs):
        self.kwargs = kwargs
        for key, value in kwargs.items():
            setattr(self, key, value)

        if not message:
            try:
                message = self.msg_fmt % kwargs
            except (KeyError, TypeError):
                # NOTE: a missing kwarg must not hide the original failure.
                message = self.msg_fmt
        self.message = message
        super(CurviromException, self).__init__(message)

    def __str__(self):
        return self.message


class InputDomainError(CurviromException, ValueError):
    msg_fmt = _("Argument outside its domain: %(reason)s")


class IndexDomainError(InputDomainError):
    msg_fmt = _("Node (%(i)s, %(j)s) is not an interior node of a "
                "%(n_eta)s x %(n_xi)s mesh.")


class ValidationError(InputDomainError):
    msg_fmt = _("Parameter '%(field)s' = %(value)s is outside its bounds "
                "[%(lower)s, %(upper)s].")


class ConstructionError(CurviromException, ValueError):
    msg_fmt = _("Cannot construct %(what)s: %(reason)s")


class DataError(CurviromException, ValueError):
    msg_fmt = _("Invalid data: %(reason)s")


class DegenerateDataError(DataError):
    msg_fmt = _("Degenerate data: %(reason)s")


class ConvergenceError(CurviromException, RuntimeError):
    msg_fmt = _("%(what)s did not converge within %(iterations)s "
                "iterations (last loss %(last_loss).3e, tolerance "
                "%(tol).1e).")


class MeshFoldingError(CurviromException, RuntimeError):
    msg_fmt = _("Mesh is folded: minimum Jacobian %(jacobian_min).3e.")


class ConditioningError(CurviromException, RuntimeError):
    msg_fmt = _("Covariance matrix is not positive definite even with "
                "jitter %(jitter).1e.")


class LevelError(CurviromException, RuntimeError):
    """A failure inside one level of the hierarchy.

    The original exception is chained as ``__cause__``.
    """
    msg_fmt = _("Level %(level)s failed: %(reason)s")


class LoadError(CurviromException, IOError):
    msg_fmt = _("Cannot load '%(path)s': %(reason)s")


class CommandError(CurviromException):
    msg_fmt = _("%(reason)s")
