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
Reader of the CIFAR-100 binary distribution.

Each record holds 3074 bytes: the coarse label, the fine label and 3072
pixel bytes as three 32x32 channel planes (R, G, B).
"""

import logging
import os

import numpy as np

from .. import splitID
from .labeledStore import LabeledStore

logger = logging.getLogger('fewShot.data')

RECORD_BYTES = 3074
IMAGE_SHAPE = (3, 32, 32)
FILES = ('train.bin', 'test.bin')
SUBDIR = 'cifar-100-binary'


class CifarFormatError(ValueError):

    def __init__(self, message, offset):
        super(CifarFormatError, self).__init__(
            '%s (byte offset %d)' % (message, offset))
        self.detail = message
        self.offset = offset


def _decodeLabels(raw):
    n, rest = divmod(len(raw), RECORD_BYTES)
    if rest:
        raise CifarFormatError('Truncated record, %d trailing bytes' % rest,
                               n * RECORD_BYTES)
    buf = np.frombuffer(raw, dtype=np.uint8).reshape(n, RECORD_BYTES)
    coarse = buf[:, 0].astype(int)
    fine = buf[:, 1].astype(int)
    bad = np.flatnonzero(coarse >= splitID.CIFAR_COARSE_CLASSES)
    if bad.size:
        raise CifarFormatError('Coarse label %d out of range' %
                               coarse[bad[0]], int(bad[0]) * RECORD_BYTES)
    bad = np.flatnonzero(fine >= splitID.CIFAR_FINE_CLASSES)
    if bad.size:
        raise CifarFormatError('Fine label %d out of range' % fine[bad[0]],
                               int(bad[0]) * RECORD_BYTES + 1)
    return buf, coarse, fine


def decodeCifarRecords(raw):
    """
    Decode raw record bytes.

    :param bytes raw: Concatenated records
    :return: (coarse, fine, images) with images of shape (n, 3, 32, 32)
             scaled to [0, 1]
    :raises CifarFormatError: on truncated data or invalid label bytes
    """
    buf, coarse, fine = _decodeLabels(raw)
    images = buf[:, 2:].reshape((len(buf),) + IMAGE_SHAPE) / 255.0
    return coarse, fine, images


def downsample(images, size):
    """
    Area-average (n, C, H, W) images to (n, C, size, size).
    """
    n, c, h, w = images.shape
    if h % size or w % size:
        raise ValueError('Cannot downsample %dx%d to %dx%d' % (h, w, size,
                                                                size))
    return images.reshape(n, c, size, h // size, size, w // size).mean(
        axis=(3, 5))


def channelStats(images):
    """
    Per-channel mean and standard deviation of (n, C, H, W) images.
    """
    return images.mean(axis=(0, 2, 3)), images.std(axis=(0, 2, 3))


def normalizeImages(images, stats):
    mean, std = (np.asarray(s, dtype=np.float64) for s in stats)
    return (images - mean.reshape(1, -1, 1, 1)) / std.reshape(1, -1, 1, 1)


def _locate(path, fname):
    for candidate in (os.path.join(path, fname),
                      os.path.join(path, SUBDIR, fname)):
        if os.path.isfile(candidate):
            return candidate
    raise FileNotFoundError('%s not found under %s' % (fname, path))


def readCifarFile(fname):
    with open(fname, 'rb') as f:
        raw = f.read()
    try:
        return decodeCifarRecords(raw)
    except CifarFormatError as e:
        raise CifarFormatError('%s: %s' % (fname, e.detail), e.offset)


def loadCifar100(path, size=None, normalize=True):
    """
    Load train.bin and test.bin into one store.

    Per-channel normalization statistics are computed from the train.bin
    records of the FC100 training superclasses only and applied to every
    record.

    :param str path: Directory holding the binary files (directly or in
           cifar-100-binary/)
    :param int size: Downsample to size x size when given
    :param bool normalize: Apply per-channel standardization
    :rtype: LabeledStore
    :raises ValueError: when the fine classes hold unequal record counts
    """
    parts = []
    for fname in FILES:
        coarse, fine, images = readCifarFile(_locate(path, fname))
        if size is not None and size != IMAGE_SHAPE[1]:
            images = downsample(images, size)
        parts.append((coarse, fine, images))
    stats = None
    images = [x for _, _, x in parts]
    if normalize:
        train_coarse = parts[0][0]
        fitted = np.isin(train_coarse, splitID.FC100_TRAIN)
        if not fitted.any():
            raise ValueError('train.bin holds no record of the training '
                             'superclasses')
        stats = channelStats(images[0][fitted])
        images = [normalizeImages(x, stats) for x in images]
        stats = (stats[0].tolist(), stats[1].tolist())
    logger.info('Loaded CIFAR-100 from %s: %d train + %d test records',
                path, len(parts[0][0]), len(parts[1][0]))
    store = LabeledStore(np.concatenate(images),
                         np.concatenate([f for _, f, _ in parts]),
                         np.concatenate([c for c, _, _ in parts]),
                         norm_stats=stats, name='cifar100')
    return store.checkBalanced()


def loadCifar100Labels(path):
    """
    Labels of train.bin and test.bin without pixel data (inputs of width
    0), enough for building class splits.

    :rtype: LabeledStore
    """
    coarse, fine = [], []
    for fname in FILES:
        with open(_locate(path, fname), 'rb') as f:
            raw = f.read()
        try:
            _, c, l = _decodeLabels(raw)
        except CifarFormatError as e:
            raise CifarFormatError('%s: %s' % (fname, e.detail), e.offset)
        coarse.append(c)
        fine.append(l)
    coarse, fine = np.concatenate(coarse), np.concatenate(fine)
    return LabeledStore(np.empty((fine.size, 0)), fine, coarse,
                        name='cifar100-labels')
