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
Readers and writers for the on-disk formats.

Binary arrays are stored as ``<u4 ndim>``, ``<u8 dim> * ndim`` and a
little-endian float64 payload.  Manifests are JSON with a ``version`` key.
Meshes and fields export to legacy VTK structured grids or CSV.
"""

import csv
import logging
import os

import numpy as np
from oslo_serialization import jsonutils

from curvirom import exceptions
from curvirom.i18n import _

LOG = logging.getLogger(__name__)

FORMAT_VERSION = 1

_NDIM = np.dtype('<u4')
_DIM = np.dtype('<u8')
_PAYLOAD = np.dtype('<f8')


def write_array(path, array):
    array = np.ascontiguousarray(array, dtype=_PAYLOAD)
    with open(path, 'wb') as f:
        f.write(np.array([array.ndim], dtype=_NDIM).tobytes())
        f.write(np.array(array.shape, dtype=_DIM).tobytes())
        f.write(array.tobytes())


def read_array(path):
    try:
        with open(path, 'rb') as f:
            raw = f.read()
    except (IOError, OSError) as e:
        raise exceptions.LoadError(path=path, reason=str(e))

    if len(raw) < _NDIM.itemsize:
        raise exceptions.LoadError(path=path, reason=_("truncated header"))
    ndim = int(np.frombuffer(raw, dtype=_NDIM, count=1)[0])
    offset = _NDIM.itemsize + ndim * _DIM.itemsize
    if ndim > 8 or len(raw) < offset:
        raise exceptions.LoadError(path=path, reason=_("corrupt header"))
    shape = tuple(int(d) for d in np.frombuffer(
        raw, dtype=_DIM, count=ndim, offset=_NDIM.itemsize))
    expected = offset + int(np.prod(shape, dtype=np.int64)) * \
        _PAYLOAD.itemsize
    if len(raw) != expected:
        raise exceptions.LoadError(
            path=path,
            reason=_("payload is %(got)d bytes, header says %(want)d") % {
                'got': len(raw) - offset, 'want': expected - offset})
    return np.frombuffer(raw, dtype=_PAYLOAD, offset=offset).reshape(
        shape).copy()


def write_json(path, data):
    with open(path, 'w') as f:
        f.write(jsonutils.dumps(data, indent=2, sort_keys=True))
        f.write('\n')


def read_json(path, expect_version=True):
    try:
        with open(path) as f:
            data = jsonutils.loads(f.read())
    except (IOError, OSError, ValueError) as e:
        raise exceptions.LoadError(path=path, reason=str(e))
    if expect_version and data.get('version') != FORMAT_VERSION:
        raise exceptions.LoadError(
            path=path,
            reason=_("unsupported format version %(got)r, expected "
                     "%(want)r") % {'got': data.get('version'),
                                    'want': FORMAT_VERSION})
    return data


def _vtk_header(title, x):
    n_eta, n_xi = x.shape
    lines = [
        '# vtk DataFile Version 3.0',
        title[:255],
        'ASCII',
        'DATASET STRUCTURED_GRID',
        'DIMENSIONS %d %d 1' % (n_xi, n_eta),
        'POINTS %d double' % (n_eta * n_xi),
    ]
    return '\n'.join(lines) + '\n'


def export_mesh(path, x, y, scalars=None, title='curvirom mesh'):
    """Write a mesh (and optional point scalars) by file extension.

    :param scalars: mapping of name -> 2D array shaped like ``x``.
    """
    scalars = scalars or {}
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for name, values in scalars.items():
        if np.shape(values) != x.shape:
            raise exceptions.DataError(
                reason=_("scalar '%(name)s' has shape %(got)s, mesh is "
                         "%(want)s") % {'name': name,
                                        'got': np.shape(values),
                                        'want': x.shape})

    ext = os.path.splitext(path)[1].lower()
    if ext == '.vtk':
        _write_vtk(path, x, y, scalars, title)
    elif ext == '.csv':
        _write_csv(path, x, y, scalars)
    else:
        raise exceptions.CommandError(
            _("Unknown export format '%s'; use .vtk or .csv") % ext)
    LOG.debug("Exported %s grid to %s", 'x'.join(map(str, x.shape)), path)


def _write_vtk(path, x, y, scalars, title):
    # VTK orders points with the first dimension (xi) varying fastest,
    # which is the row-major flatten of [eta][xi].
    points = np.column_stack([x.ravel(), y.ravel(), np.zeros(x.size)])
    with open(path, 'w') as f:
        f.write(_vtk_header(title, x))
        np.savetxt(f, points, fmt='%.17g')
        if scalars:
            f.write('POINT_DATA %d\n' % x.size)
            for name, values in scalars.items():
                f.write('SCALARS %s double 1\n' % name)
                f.write('LOOKUP_TABLE default\n')
                np.savetxt(f, np.asarray(values, dtype=float).ravel(),
                           fmt='%.17g')


def _write_csv(path, x, y, scalars):
    n_eta, n_xi = x.shape
    ii, jj = np.meshgrid(np.arange(n_eta), np.arange(n_xi), indexing='ij')
    columns = [ii.ravel(), jj.ravel(), x.ravel(), y.ravel()]
    names = ['i', 'j', 'x', 'y']
    for name, values in scalars.items():
        columns.append(np.asarray(values, dtype=float).ravel())
        names.append(name)
    fmt = ['%d', '%d'] + ['%.17g'] * (len(names) - 2)
    np.savetxt(path, np.column_stack(columns), fmt=fmt, delimiter=',',
               header=','.join(names), comments='')


def write_rows_csv(path, rows, fields):
    """Write a list of mappings as CSV with a header line.

    Keys outside ``fields`` are ignored; missing ones are left empty.
    """
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(fields), restval='',
                                extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(dict((k, _csv_cell(v)) for k, v in row.items()))


def _csv_cell(value):
    # repr is the shortest text that reads back to the same double
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


BUNDLE_MANIFEST = 'bundle.json'


def save_bundle(path, x, y, scalars=None, meta=None):
    """Store a mesh with named point fields for later export."""
    if not os.path.isdir(path):
        os.makedirs(path)
    scalars = scalars or {}
    write_array(os.path.join(path, 'mesh-x.bin'), x)
    write_array(os.path.join(path, 'mesh-y.bin'), y)
    for name, values in scalars.items():
        write_array(os.path.join(path, name + '.bin'), values)
    write_json(os.path.join(path, BUNDLE_MANIFEST), {
        'version': FORMAT_VERSION,
        'dims': list(np.shape(x)),
        'scalars': list(scalars),
        'meta': meta or {},
    })


def load_bundle(path):
    """Return ``(x, y, scalars, meta)`` of a saved bundle."""
    manifest_path = os.path.join(path, BUNDLE_MANIFEST)
    manifest = read_json(manifest_path)
    dims = tuple(manifest['dims'])
    arrays = {}
    for name in ['mesh-x', 'mesh-y'] + list(manifest['scalars']):
        values = read_array(os.path.join(path, name + '.bin'))
        if values.shape != dims:
            raise exceptions.LoadError(
                path=os.path.join(path, name + '.bin'),
                reason=_("shape %(got)s, bundle says %(want)s") % {
                    'got': values.shape, 'want': dims})
        arrays[name] = values
    scalars = dict((name, arrays[name]) for name in manifest['scalars'])
    return arrays['mesh-x'], arrays['mesh-y'], scalars, manifest['meta']
