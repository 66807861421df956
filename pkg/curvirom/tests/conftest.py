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

"""pytest collection wiring for testscenarios.

``testscenarios.WithScenarios.run`` clones the test instance, but pytest
binds the test method onto the original instance first, so the clones
never see their scenario attributes. Expand each scenario into its own
class at collection time instead, mirroring what stestr does through
``load_tests``.
"""

import inspect

import pytest
import testscenarios
from _pytest import unittest as pytest_unittest


@pytest.hookimpl(tryfirst=True)
def pytest_pycollect_makeitem(collector, name, obj):
    if not (inspect.isclass(obj)
            and issubclass(obj, testscenarios.WithScenarios)
            and getattr(obj, 'scenarios', None)):
        return None
    items = []
    for scenario_name, attrs in obj.scenarios:
        cls_name = '%s(%s)' % (name, scenario_name)
        namespace = dict(attrs)
        namespace['scenarios'] = None
        namespace['__module__'] = obj.__module__
        namespace['__qualname__'] = cls_name
        scenario_cls = type(cls_name, (obj,), namespace)
        item = pytest_unittest.UnitTestCase.from_parent(
            collector, name=cls_name)
        item._obj = scenario_cls
        items.append(item)
    return items
