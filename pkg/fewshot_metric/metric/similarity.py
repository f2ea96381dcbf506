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
Similarity measures and the temperature scaled softmax likelihood.

Class labels are 0-based everywhere: an episode with K classes uses labels
0..K-1.
"""

import numpy as np
from scipy.special import softmax

from ..numerics import tapeOps as ops

### Similarity kinds ###
SQUARED_EUCLIDEAN = 'squared-euclidean'
COSINE_DISTANCE = 'cosine-distance'
SIMILARITY_KINDS = (SQUARED_EUCLIDEAN, COSINE_DISTANCE)
#########################


class LabelError(ValueError):
    pass


def checkKind(kind):
    if kind not in SIMILARITY_KINDS:
        raise ValueError('Unknown similarity kind %r, expected one of %s' %
                         (kind, ', '.join(SIMILARITY_KINDS)))
    return kind


class ScaledMetricHead(object):

    """
    Similarity kind plus the softmax temperature alpha.

    When trainable, the model stores log(alpha) as a parameter segment and
    self.alpha is only its initial value.
    """

    def __init__(self, kind=SQUARED_EUCLIDEAN, alpha=1.0, trainable=False):
        self.kind = checkKind(kind)
        alpha = float(alpha)
        if not (np.isfinite(alpha) and alpha > 0):
            raise ValueError('alpha must be a positive real, got %r' % alpha)
        self.alpha = alpha
        self.trainable = bool(trainable)

    def withAlpha(self, alpha):
        return ScaledMetricHead(self.kind, alpha, self.trainable)

    def toDict(self):
        return {'kind': self.kind, 'alpha': self.alpha,
                'trainable': self.trainable}

    @classmethod
    def fromDict(cls, d):
        return cls(d['kind'], d['alpha'], d['trainable'])

    def __eq__(self, other):
        return (isinstance(other, ScaledMetricHead) and
                self.toDict() == other.toDict())

    def __repr__(self):
        return 'ScaledMetricHead(%s, alpha=%g%s)' % (
            self.kind, self.alpha, ', trainable' if self.trainable else '')


def distances(kind, Z, C):
    """
    Distances between every row of Z and every row of C.

    :param str kind: Similarity kind
    :param Z: (n, D) embeddings, array or Variable
    :param C: (K, D) prototypes, array or Variable
    :return: (n, K) distance matrix
    """
    checkKind(kind)
    zv, cv = ops.value(Z), ops.value(C)
    if zv.ndim != 2 or cv.ndim != 2 or zv.shape[1] != cv.shape[1]:
        raise ValueError('Embedding dimension mismatch: %s vs %s' %
                         (zv.shape, cv.shape))
    n, dim = zv.shape
    k = cv.shape[0]
    if kind == SQUARED_EUCLIDEAN:
        diff = ops.subtract(ops.reshape(Z, (n, 1, dim)),
                            ops.reshape(C, (1, k, dim)))
        return ops.reduceSum(ops.square(diff), axis=2)

    if np.any(np.all(zv == 0, axis=1)) or np.any(np.all(cv == 0, axis=1)):
        raise ValueError('Cosine distance is undefined for a zero vector')
    zn = ops.sqrt(ops.reduceSum(ops.square(Z), axis=1, keepdims=True))
    cn = ops.sqrt(ops.reduceSum(ops.square(C), axis=1, keepdims=True))
    dots = ops.matmul(Z, ops.transpose(C))
    return ops.negative(ops.divide(dots,
                                   ops.multiply(zn, ops.transpose(cn))))


def distance(kind, z, c):
    """
    d(z, c) for two single embeddings.
    """
    zv, cv = ops.value(z), ops.value(c)
    if zv.shape != cv.shape or zv.ndim != 1:
        raise ValueError('Embedding dimension mismatch: %s vs %s' %
                         (zv.shape, cv.shape))
    d = distances(kind, ops.reshape(z, (1, -1)), ops.reshape(c, (1, -1)))
    return ops.getitem(d, (0, 0))


def classMeans(Z, labels, ways):
    """
    Mean embedding of every class, normalized by that class's count.

    :return: (ways, D) matrix
    """
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= ways):
        raise LabelError('Labels must lie in 0..%d' % (ways - 1))
    counts = np.bincount(labels, minlength=ways)
    if np.any(counts == 0):
        raise ValueError('Class %d has no embeddings' %
                         int(np.flatnonzero(counts == 0)[0]))
    weights = np.zeros((ways, labels.size))
    weights[labels, np.arange(labels.size)] = 1.0
    weights /= counts[:, None]
    return ops.matmul(weights, Z)


def scaledClassProbabilities(row, alpha):
    """
    softmax(-alpha * d) over the classes (last axis), with max subtraction.

    :param row: DistanceRow (K,) or a stack of rows (n, K)
    :param float alpha: Temperature, > 0
    """
    row = np.asarray(row, dtype=np.float64)
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError('alpha must be positive, got %r' % alpha)
    if row.shape[-1] < 2:
        raise ValueError('Need at least 2 classes, got %d' % row.shape[-1])
    if not np.all(np.isfinite(row)):
        raise ValueError('Non-finite distance')
    return softmax(-alpha * row, axis=-1)


def queryTerms(D, labels, alpha):
    """
    Per-query terms alpha * d(z_i, c_{y_i}) + log sum_j exp(-alpha d(z_i, c_j)).
    """
    labels = np.asarray(labels, dtype=int)
    k = ops.value(D).shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise LabelError('Query label out of range 0..%d' % (k - 1))
    scaled = ops.multiply(alpha, D)
    picked = ops.getitem(scaled, (np.arange(labels.size), labels))
    return ops.add(picked, ops.logsumexp(ops.negative(scaled), axis=1))


def episodeLoss(query_z, query_labels, prototypes, head, alpha=None):
    """
    Episodic cross-entropy summed over all queries (sum over classes of the
    class-wise losses).

    :param query_z: (q, D) query embeddings
    :param query_labels: q labels in 0..K-1
    :param prototypes: PrototypeSet or (K, D) prototype matrix
    :param ScaledMetricHead head: Similarity and temperature
    :param alpha: Temperature override (e.g. a trainable Variable)
    """
    C = getattr(prototypes, 'prototypes', prototypes)
    alpha = head.alpha if alpha is None else alpha
    D = distances(head.kind, query_z, C)
    return ops.reduceSum(queryTerms(D, query_labels, alpha))
