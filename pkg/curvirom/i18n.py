# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

"""oslo_i18n integration for curvirom messages.

User-facing strings (command errors, help text, exception messages) go
through ``_``; operator log records through the level translators.
"""

import oslo_i18n

DOMAIN = 'curvirom'

_translators = oslo_i18n.TranslatorFactory(domain=DOMAIN)

_ = _translators.primary

# Log-level translators; the suffix letter is the level.
_LI = _translators.log_info
_LW = _translators.log_warning
_LE = _translators.log_error
