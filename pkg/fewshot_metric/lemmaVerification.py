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
Numerical check of the small and large temperature limits of the
class-wise gradient on random instances with a linear embedder.
"""

import logging

import numpy as np
import pandas as pd

from .embedding import ExtractorConfig, buildExtractor
from .episodes import Episode
from .metric import (SQUARED_EUCLIDEAN, ScaledMetricHead, classwiseGrad,
                     distanceGrads, episodeDistances, limitGradLargeAlpha,
                     limitGradSmallAlpha, relativeError)

logger = logging.getLogger('fewShot.lemma')

REPORT_COLUMNS = ['trial', 'alpha', 'side', 'rel_error', 'monotone',
                  'zero_contrib_ok', 'misassigned']
# Errors below this are rounding noise
NOISE_FLOOR = 1e-12
SMALL_ALPHAS = (1e-2, 1e-3, 1e-4)
LARGE_ALPHAS = (10.0, 100.0, 1000.0)


def randomInstance(rng, ways=3, dim=4, shots=2, queries_per_class=3,
                   spread=0.5, misassign=None):
    """
    Linear embedder and a Gaussian episode around random class centers.

    With misassign=k the first class-k query is moved onto the mean sample
    input of class k+1, so its embedding sits on that class's prototype.

    :return: (extractor, params, episode)
    """
    config = ExtractorConfig(kind='linear', input_shape=(dim,),
                             embedding_dim=dim, weight_decay=0.0)
    extractor, params = buildExtractor(config, rng)
    centers = spread * rng.standard_normal((ways, dim))
    sample_labels = np.repeat(np.arange(ways), shots)
    query_labels = np.repeat(np.arange(ways), queries_per_class)
    noise = 0.5 * spread
    sample_inputs = centers[sample_labels] + noise * rng.standard_normal(
        (sample_labels.size, dim))
    query_inputs = centers[query_labels] + noise * rng.standard_normal(
        (query_labels.size, dim))
    if misassign is not None:
        other = (misassign + 1) % ways
        first = np.flatnonzero(query_labels == misassign)[0]
        query_inputs[first] = sample_inputs[sample_labels == other].mean(
            axis=0)
    episode = Episode(sample_inputs=sample_inputs,
                      sample_labels=sample_labels,
                      query_inputs=query_inputs,
                      query_labels=query_labels,
                      class_ids=np.arange(ways), ways=ways, shots=shots)
    return extractor, params, episode


def nearestGaps(k, episode, extractor, params, kind):
    """
    Gap between the two smallest distances of every class-k query.
    """
    D = episodeDistances(episode, extractor, kind, params.segments())
    rows = np.flatnonzero(np.asarray(episode.query_labels) == k)
    ordered = np.sort(D[rows], axis=1)
    return ordered[:, 1] - ordered[:, 0], np.argmin(D[rows], axis=1)


def _monotone(errors):
    return bool(np.all(np.diff(errors) <= NOISE_FLOOR))


def lemmaTrials(trials=20, seed=7, ways=3, dim=4, shots=2,
                queries_per_class=3, small_alphas=SMALL_ALPHAS,
                large_alphas=LARGE_ALPHAS, min_gap=0.1,
                kind=SQUARED_EUCLIDEAN):
    """
    Compare (1/alpha) dJ_k/dphi with its closed-form limits.

    Every trial draws a new instance, uses class k = trial mod ways and
    places one class-k query on the prototype of another class, so the
    large-alpha limit has a nonzero term. The large-alpha side is skipped
    for instances where a class-k query has two prototypes closer than
    min_gap to each other in distance.

    :return: One row per (trial, alpha, side) with the relative error,
             whether the errors of that trial and side decrease towards the
             limit, whether queries already nearest to their own prototype
             contribute exactly zero and the count of class-k queries
             nearest another prototype (large side only)
    :rtype: pandas.DataFrame
    """
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        k = trial % ways
        extractor, params, episode = randomInstance(
            rng, ways, dim, shots, queries_per_class, misassign=k)
        grads = distanceGrads(k, episode, extractor, params, kind)

        limit = limitGradSmallAlpha(k, episode, extractor, params, kind,
                                    grads=grads)
        errors = [relativeError(
            classwiseGrad(k, episode, extractor, params,
                          ScaledMetricHead(kind, a)).values / a, limit)
            for a in small_alphas]
        ok = _monotone(errors)
        rows.extend((trial, a, 'small', e, ok, True, 0)
                    for a, e in zip(small_alphas, errors))

        gaps, nearest = nearestGaps(k, episode, extractor, params, kind)
        if np.any(gaps < min_gap):
            logger.warning('Trial %d: distance gap %.3g below %.3g, large '
                           'alpha side skipped', trial, gaps.min(), min_gap)
            continue
        limit, contributions = limitGradLargeAlpha(
            k, episode, extractor, params, kind, grads=grads,
            return_contributions=True)
        own = nearest == k
        zero_ok = bool(np.all(contributions[own] == 0.0))
        errors = [relativeError(
            classwiseGrad(k, episode, extractor, params,
                          ScaledMetricHead(kind, a)).values / a, limit)
            for a in large_alphas]
        ok = _monotone(errors)
        rows.extend((trial, a, 'large', e, ok, zero_ok, int((~own).sum()))
                    for a, e in zip(large_alphas, errors))
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def lemmaSummary(report, tolerance=1e-3):
    """
    Passed when both sides are within tolerance at their most extreme
    alpha, every trial is monotone, correctly assigned queries contribute
    zero and at least one large-alpha trial has a misassigned query.

    :return: (passed, worst error at the most extreme alpha of each side)
    """
    worst = {}
    for side, extreme in (('small', report[report.side == 'small'].alpha
                           .min()),
                          ('large', report[report.side == 'large'].alpha
                           .max())):
        rows = report[(report.side == side) & (report.alpha == extreme)]
        worst[side] = float(rows.rel_error.max()) if len(rows) else np.nan
    large = report[report.side == 'large']
    passed = (all(e <= tolerance for e in worst.values() if np.isfinite(e))
              and bool(report.monotone.all())
              and bool(report.zero_contrib_ok.all())
              and bool((large.misassigned > 0).any()))
    return passed, worst
