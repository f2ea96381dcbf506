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

from dataclasses import dataclass

import numpy as np

from ..metric import classMeans, distances, scaledClassProbabilities
from ..numerics import tapeOps as ops


class InsufficientData(ValueError):
    pass


class EmptyClass(ValueError):
    pass


@dataclass
class Episode:

    """
    M-shot K-way task. Labels are episode-local, 0..ways-1, in the order of
    class_ids.
    """

    sample_inputs: np.ndarray
    sample_labels: np.ndarray
    query_inputs: np.ndarray
    query_labels: np.ndarray
    class_ids: np.ndarray
    ways: int
    shots: int

    @property
    def queries(self):
        return len(self.query_labels)

    def relabeled(self, permutation):
        """
        Same episode with class k renamed to permutation[k].
        """
        permutation = np.asarray(permutation, dtype=int)
        class_ids = np.empty_like(np.asarray(self.class_ids))
        class_ids[permutation] = self.class_ids
        return Episode(self.sample_inputs,
                       permutation[np.asarray(self.sample_labels, dtype=int)],
                       self.query_inputs,
                       permutation[np.asarray(self.query_labels, dtype=int)],
                       class_ids, self.ways, self.shots)


@dataclass
class PrototypeSet:
    prototypes: object
    task_repr: object


def sampleEpisode(split, ways, shots, queries_per_class=None, rng=None,
                  query_total=None):
    """
    Draw one episode from a dataset split.

    Classes are drawn uniformly without replacement. Per class, *shots*
    examples form the sample set. Queries are either *queries_per_class*
    further examples of every class, or *query_total* examples drawn
    uniformly from the remaining examples of all K classes.

    :param DatasetSplit split: Split to sample from
    :param int ways: K
    :param int shots: M
    :param int queries_per_class: Queries per class
    :param rng: Seed or numpy Generator
    :param int query_total: Total query count (alternative to
           queries_per_class)
    :rtype: Episode
    :raises InsufficientData: when the split cannot supply the episode
    """
    if (queries_per_class is None) == (query_total is None):
        raise ValueError('Give exactly one of queries_per_class and '
                         'query_total')
    if ways < 2 or shots < 1:
        raise ValueError('Need ways >= 2 and shots >= 1')
    rng = np.random.default_rng(rng)
    class_ids = np.asarray(split.class_ids)
    if len(class_ids) < ways:
        raise InsufficientData('Split %s has %d classes, episode needs %d' %
                               (split.name, len(class_ids), ways))

    per_class = shots + (queries_per_class or 0)
    chosen = rng.choice(class_ids, size=ways, replace=False)
    sample_ids, query_ids, query_labels, rest, rest_labels = [], [], [], [], []
    for k, c in enumerate(chosen):
        ids = split.store.classIndex(c)
        if len(ids) < per_class:
            raise InsufficientData('Class %d has %d examples, episode needs '
                                   '%d' % (c, len(ids), per_class))
        picked = rng.permutation(ids)
        sample_ids.append(picked[:shots])
        if queries_per_class is not None:
            query_ids.append(picked[shots:per_class])
            query_labels.append(np.full(queries_per_class, k))
        else:
            rest.append(picked[shots:])
            rest_labels.append(np.full(len(ids) - shots, k))

    if query_total is not None:
        rest = np.concatenate(rest)
        if len(rest) < query_total:
            raise InsufficientData('Only %d examples left for %d queries' %
                                   (len(rest), query_total))
        pick = rng.choice(len(rest), size=query_total, replace=False)
        query_ids = [rest[pick]]
        query_labels = [np.concatenate(rest_labels)[pick]]

    sample_ids = np.concatenate(sample_ids)
    query_ids = np.concatenate(query_ids)
    inputs = split.store.inputs
    return Episode(sample_inputs=inputs[sample_ids],
                   sample_labels=np.repeat(np.arange(ways), shots),
                   query_inputs=inputs[query_ids],
                   query_labels=np.concatenate(query_labels).astype(int),
                   class_ids=chosen, ways=ways, shots=shots)


def computePrototypes(sample_z, sample_labels, ways):
    """
    Class prototypes (per-class means) and the task representation (mean of
    the prototypes).

    :raises EmptyClass: when a class has no sample embedding
    """
    labels = np.asarray(sample_labels, dtype=int)
    if labels.size and labels.min() >= 0 and labels.max() < ways:
        counts = np.bincount(labels, minlength=ways)
        if np.any(counts == 0):
            raise EmptyClass('Class %d has no sample embedding' %
                             int(np.flatnonzero(counts == 0)[0]))
    elif labels.size == 0:
        raise EmptyClass('Empty sample set')
    prototypes = classMeans(sample_z, labels, ways)
    return PrototypeSet(prototypes, ops.reduceMean(prototypes, axis=0))


def classifyQuery(prototypes, z, head):
    """
    Nearest prototype under the head's similarity; ties go to the lowest
    class index.

    :return: (predicted class, probabilities)
    """
    C = getattr(prototypes, 'prototypes', prototypes)
    z = np.asarray(z, dtype=np.float64).reshape(1, -1)
    D = ops.value(distances(head.kind, z, ops.value(C)))[0]
    return int(np.argmin(D)), scaledClassProbabilities(D, head.alpha)
