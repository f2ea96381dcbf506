#
# Copyright 2026 The fewshot_metric authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#


"""
Flat binary checkpoint container.

Layout (little endian):

    4 bytes   magic b'FSMC'
    1 byte    format version
    4 bytes   uint32 header length
    n bytes   UTF-8 JSON header (segment table, model configuration,
              normalization buffers, data normalization statistics,
              training configuration echo)
    8*size    float64 parameter values
    4 bytes   uint32 CRC-32 of everything before it
"""

import json
import logging
import zlib

import numpy as np

from ..FewShotModel import FewShotModel
from ..fileTools import atomicWrite
from ..numerics import ParameterLayout, ParameterVector

logger = logging.getLogger('fewShot.data')

MAGIC = b'FSMC'
FORMAT_VERSION = 1
_U32 = np.dtype('<u4')
_F64 = np.dtype('<f8')
_PREAMBLE = len(MAGIC) + 1 + _U32.itemsize


class CheckpointError(IOError):
    pass


class ChecksumError(CheckpointError):
    pass


class VersionError(CheckpointError):
    pass


class ConfigMismatchError(CheckpointError):
    pass


def encodeCheckpoint(model, train_config=None, norm_stats=None):
    """
    :return: Checkpoint bytes
    """
    header = {'segments': model.layout.toTable(),
              'model': model.configEcho(),
              'running_stats': dict(
                  (name, [np.asarray(m).tolist(), np.asarray(v).tolist()])
                  for name, (m, v) in model.extractor.runningStats.items()),
              'norm_stats': norm_stats,
              'train': train_config.toDict() if train_config else None}
    head = json.dumps(header, sort_keys=True).encode('utf-8')
    body = b''.join([MAGIC, bytes([FORMAT_VERSION]),
                     np.array([len(head)], dtype=_U32).tobytes(), head,
                     model.params.values.astype(_F64).tobytes()])
    return body + np.array([zlib.crc32(body)], dtype=_U32).tobytes()


def decodeCheckpoint(raw):
    """
    Verify and split checkpoint bytes.

    :return: (header dict, float64 values)
    """
    if len(raw) < _PREAMBLE + _U32.itemsize or raw[:4] != MAGIC:
        raise CheckpointError('Not a checkpoint file')
    body, trailer = raw[:-_U32.itemsize], raw[-_U32.itemsize:]
    if zlib.crc32(body) != int(np.frombuffer(trailer, dtype=_U32)[0]):
        raise ChecksumError('Checkpoint checksum mismatch')
    version = body[4]
    if version != FORMAT_VERSION:
        raise VersionError('Checkpoint format version %d, expected %d' %
                           (version, FORMAT_VERSION))
    n = int(np.frombuffer(body[5:_PREAMBLE], dtype=_U32)[0])
    header = json.loads(body[_PREAMBLE:_PREAMBLE + n].decode('utf-8'))
    values = np.frombuffer(body[_PREAMBLE + n:], dtype=_F64).astype(
        np.float64)
    return header, values


def saveCheckpoint(model, path, train_config=None, norm_stats=None):
    raw = encodeCheckpoint(model, train_config, norm_stats)
    with atomicWrite(path, 'wb') as f:
        f.write(raw)
    logger.info('Saved checkpoint %s (%d parameters)', path,
                model.layout.size)


def _echoKey(echo):
    return json.dumps(echo, sort_keys=True)


def modelFromCheckpoint(header, values, expected=None):
    if expected is not None:
        want = expected.configEcho() if isinstance(expected, FewShotModel) \
            else expected
        for key, value in want.items():
            if _echoKey(value) != _echoKey(header['model'].get(key)):
                raise ConfigMismatchError('Checkpoint %s configuration '
                                          'differs from the expected one' %
                                          key)
    model = FewShotModel.fromEcho(header['model'])
    layout = ParameterLayout.fromTable(header['segments'])
    if layout != model.layout:
        raise ConfigMismatchError('Checkpoint segment table does not match '
                                  'its model configuration')
    if values.size != layout.size:
        raise CheckpointError('Checkpoint holds %d values, layout needs %d'
                              % (values.size, layout.size))
    model.params = ParameterVector(layout, values)
    for name, (m, v) in header['running_stats'].items():
        model.extractor.runningStats[name] = (np.array(m), np.array(v))
    model.metadata = {'norm_stats': header.get('norm_stats'),
                      'train': header.get('train')}
    return model


def loadCheckpoint(path, expected=None):
    """
    Rebuild a model from a checkpoint file.

    :param str path: Checkpoint file
    :param expected: FewShotModel or configuration echo the checkpoint must
           match
    :rtype: FewShotModel
    :raises ChecksumError: corrupted file
    :raises VersionError: unsupported format version
    :raises ConfigMismatchError: checkpoint of another model configuration
    """
    with open(path, 'rb') as f:
        raw = f.read()
    header, values = decodeCheckpoint(raw)
    return modelFromCheckpoint(header, values, expected)
