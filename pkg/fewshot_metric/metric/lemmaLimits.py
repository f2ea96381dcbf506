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
Class-wise gradients of the episodic loss and their closed-form limits for
vanishing and exploding temperature.

An *embedder* is any callable embedder(segments, x) -> (n, D) embeddings
written with tapeOps, e.g. an Extractor. Prototypes are recomputed from the
embedded sample set inside every program, so all gradients are total
derivatives with respect to the extractor parameters.
"""

import numpy as np

from ..numerics import GradientVector, valueAndGrad
from ..numerics import tapeOps as ops
from .similarity import (classMeans, distances, queryTerms,
                         scaledClassProbabilities)

# Two distances closer than this count as a tie
TIE_TOLERANCE = 1e-9


class AssumptionViolation(ValueError):
    pass


def _inputs(episode):
    return np.concatenate([np.asarray(episode.sample_inputs, dtype=float),
                           np.asarray(episode.query_inputs, dtype=float)])


def episodeDistances(episode, embedder, kind, segments):
    """
    (q, K) distances between conditioned query embeddings and prototypes.
    """
    ns = len(episode.sample_labels)
    Z = embedder(segments, _inputs(episode))
    C = classMeans(ops.getitem(Z, slice(0, ns)), episode.sample_labels,
                   episode.ways)
    return distances(kind, ops.getitem(Z, slice(ns, None)), C)


def _queryRows(k, episode):
    labels = np.asarray(episode.query_labels, dtype=int)
    if not 0 <= k < episode.ways:
        raise ValueError('Class %d outside 0..%d' % (k, episode.ways - 1))
    rows = np.flatnonzero(labels == k)
    if rows.size == 0:
        raise ValueError('Query set of class %d is empty' % k)
    return rows


def classwiseProgram(k, episode, embedder, kind, alpha):
    rows = _queryRows(k, episode)
    labels = np.full(rows.size, k)

    def program(segments):
        D = episodeDistances(episode, embedder, kind, segments)
        return ops.reduceSum(queryTerms(ops.getitem(D, rows), labels, alpha))
    return program


def classwiseGrad(k, episode, embedder, params, head):
    """
    Gradient of the class-k loss J_k with respect to the parameters.

    :rtype: GradientVector
    """
    program = classwiseProgram(k, episode, embedder, head.kind, head.alpha)
    return valueAndGrad(program, params)[1]


def distanceGrads(k, episode, embedder, params, kind):
    """
    Gradients of d(f(x_i), c_j) for every query i of class k and every
    class j.

    :return: (rows, grads) with grads of shape (len(rows), K, size)
    """
    rows = _queryRows(k, episode)
    grads = np.zeros((rows.size, episode.ways, params.layout.size))
    for a, i in enumerate(rows):
        for j in range(episode.ways):
            def program(segments, i=i, j=j):
                D = episodeDistances(episode, embedder, kind, segments)
                return ops.getitem(D, (i, j))
            grads[a, j] = valueAndGrad(program, params)[1].values
    return rows, grads


def bracketGrad(k, episode, embedder, params, kind, alpha, grads=None):
    '''
    Gradient of J_k divided by alpha, assembled from the per-distance
    gradients weighted by the softmax probabilities at alpha.
    '''
    rows, G = grads if grads is not None else distanceGrads(
        k, episode, embedder, params, kind)
    D = episodeDistances(episode, embedder, kind, params.segments())
    p = scaledClassProbabilities(D[rows], alpha)
    total = G[:, k, :] - np.einsum('aj,ajp->ap', p, G)
    return GradientVector(params.layout, total.sum(axis=0))


def limitGradSmallAlpha(k, episode, embedder, params, kind, grads=None):
    """
    Limit of (1/alpha) dJ_k/dphi as alpha -> 0:
    sum_i [(K-1)/K d'(x_i, c_k) - 1/K sum_{j != k} d'(x_i, c_j)].
    """
    rows, G = grads if grads is not None else distanceGrads(
        k, episode, embedder, params, kind)
    ways = episode.ways
    others = [j for j in range(ways) if j != k]
    total = ((ways - 1.0) / ways) * G[:, k, :].sum(axis=0)
    if others:
        total = total - G[:, others, :].sum(axis=(0, 1)) / ways
    return GradientVector(params.layout, total)


def limitGradLargeAlpha(k, episode, embedder, params, kind, grads=None,
                        return_contributions=False):
    """
    Limit of (1/alpha) dJ_k/dphi as alpha -> infinity:
    sum_i [d'(x_i, c_k) - d'(x_i, c_{j*_i})], j*_i the nearest prototype.

    Queries already nearest to their own prototype contribute exactly zero.

    :raises AssumptionViolation: when the nearest prototype of a query is
            tied within TIE_TOLERANCE
    """
    rows, G = grads if grads is not None else distanceGrads(
        k, episode, embedder, params, kind)
    D = episodeDistances(episode, embedder, kind, params.segments())
    contributions = np.zeros((rows.size, params.layout.size))
    for a, i in enumerate(rows):
        order = np.argsort(D[i], kind='stable')
        if D[i, order[1]] - D[i, order[0]] < TIE_TOLERANCE:
            raise AssumptionViolation(
                'Query %d is equidistant from prototypes %d and %d' %
                (i, order[0], order[1]))
        nearest = order[0]
        if nearest != k:
            contributions[a] = G[a, k] - G[a, nearest]
    limit = GradientVector(params.layout, contributions.sum(axis=0))
    if return_contributions:
        return limit, contributions
    return limit


def relativeError(approx, exact):
    '''
    ||approx - exact|| / ||exact||, or the absolute error when the exact
    vector vanishes.
    '''
    approx = getattr(approx, 'values', approx)
    exact = getattr(exact, 'values', exact)
    err = float(np.linalg.norm(np.asarray(approx) - np.asarray(exact)))
    scale = float(np.linalg.norm(exact))
    return err / scale if scale > 1e-12 else err
