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
Conditioned inference on one episode.

Without a task embedding network the sample and query sets are embedded
once. With one, the sample set is first embedded under identity
conditioning to obtain the task representation c_bar, the network maps
c_bar to FILM parameters, and both sets are embedded again under that
conditioning. Prototypes are always taken from the final sample
embeddings.
"""

from dataclasses import dataclass

import numpy as np

from ..embedding import tenPredict
from ..metric import distances, queryTerms, scaledClassProbabilities
from ..numerics import tapeOps as ops
from .episode import computePrototypes

REDUCTIONS = ('sum', 'mean')


@dataclass
class EpisodeResult:
    probabilities: np.ndarray
    predictions: np.ndarray
    loss: float
    eq1_loss: float
    penalty: float
    accuracy: float


def _embedSets(model, segments, episode, film, training):
    extractor = model.extractor
    if model.extractor_config.norm_scope == 'separate':
        return (extractor(segments, episode.sample_inputs, film, training),
                extractor(segments, episode.query_inputs, film, training))
    ns = len(episode.sample_labels)
    Z = extractor(segments,
                  np.concatenate([np.asarray(episode.sample_inputs),
                                  np.asarray(episode.query_inputs)]),
                  film, training)
    return ops.getitem(Z, slice(0, ns)), ops.getitem(Z, slice(ns, None))


def episodeForward(model, segments, episode, training=False):
    """
    Query/prototype distances of an episode.

    :return: (D, prototypes, film) with D of shape (q, K); film is None
             without a task embedding network
    """
    film = None
    if model.ten is not None:
        first = model.extractor(segments, episode.sample_inputs, None,
                                training)
        c_bar = computePrototypes(first, episode.sample_labels,
                                  episode.ways).task_repr
        film = tenPredict(model.ten, segments, c_bar)
    sample_z, query_z = _embedSets(model, segments, episode, film, training)
    prototypes = computePrototypes(sample_z, episode.sample_labels,
                                   episode.ways)
    D = distances(model.head.kind, query_z, prototypes.prototypes)
    return D, prototypes, film


def reduceTerms(terms, reduction):
    if reduction == 'sum':
        return ops.reduceSum(terms)
    if reduction == 'mean':
        return ops.reduceMean(terms)
    raise ValueError('Unknown loss reduction %r' % reduction)


def episodeLossProgram(model, episode, reduction='sum', training=False,
                       with_penalty=True):
    """
    Scalar program: episodic cross-entropy of the episode plus the model
    penalties.
    """
    def program(segments):
        D = episodeForward(model, segments, episode, training)[0]
        loss = reduceTerms(queryTerms(D, episode.query_labels,
                                      model.alpha(segments)), reduction)
        if with_penalty:
            loss = ops.add(loss, model.penalty(segments))
        return loss
    return program


def runEpisode(model, episode, params=None, training=False, reduction='sum'):
    """
    Classify the query set of one episode.

    :param FewShotModel model: Model
    :param Episode episode: Episode
    :param ParameterVector params: Parameters, model.params when omitted
    :param bool training: Training mode normalization
    :param str reduction: 'sum' or 'mean' over queries
    :rtype: EpisodeResult
    """
    segments = model.segments(params)
    D, _, _ = episodeForward(model, segments, episode, training)
    D = ops.value(D)
    alpha = float(ops.value(model.alpha(segments)))
    labels = np.asarray(episode.query_labels, dtype=int)
    # argmin takes the lowest class index on ties
    predictions = np.argmin(D, axis=1)
    eq1 = float(reduceTerms(queryTerms(D, labels, alpha), reduction))
    penalty = float(ops.value(model.penalty(segments)))
    return EpisodeResult(probabilities=scaledClassProbabilities(D, alpha),
                         predictions=predictions,
                         loss=eq1 + penalty,
                         eq1_loss=eq1,
                         penalty=penalty,
                         accuracy=float(np.mean(predictions == labels)))
