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
Evaluation protocol: accuracy averaged over randomly generated tasks with a
95% confidence interval of 1.96 standard errors over per-task accuracies.
"""

from dataclasses import dataclass
from multiprocessing import Pool
import logging

import numpy as np
from scipy.stats import sem

from ..episodes import sampleEpisode, runEpisode

logger = logging.getLogger('fewShot.training')

CI_Z = 1.96


@dataclass
class EvalResult:
    accuracy: float
    ci: float
    per_task: np.ndarray
    restart_means: np.ndarray
    loss: float = float('nan')

    def __str__(self):
        return '%.4f +- %.4f' % (self.accuracy, self.ci)


def seedSequence(rng):
    """
    SeedSequence from a seed, a SeedSequence or a numpy Generator.
    """
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(2 ** 63)))
    return np.random.SeedSequence(rng)


def _taskOutcome(job):
    model, split, ways, shots, n_queries, seed = job
    episode = sampleEpisode(split, ways, shots, rng=np.random.default_rng(seed),
                            query_total=n_queries)
    result = runEpisode(model, episode, reduction='mean')
    return result.accuracy, result.eq1_loss


def confidenceInterval(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(CI_Z * sem(values))


def evaluate(model, split, n_tasks=500, n_queries=100, restarts=1, rng=None,
             ways=5, shots=5, workers=1):
    '''
    Mean query accuracy over n_tasks random tasks, repeated for every
    restart with fresh tasks.

    Every task gets its own seed spawned from one SeedSequence, so the
    result does not depend on the worker count.

    :param FewShotModel model: Model, read only
    :param DatasetSplit split: Split to draw tasks from
    :param int n_tasks: Tasks per restart
    :param int n_queries: Queries per task
    :param int restarts: Independent repetitions
    :param rng: Seed, SeedSequence or numpy Generator
    :param int workers: Worker processes
    :rtype: EvalResult
    '''
    if n_tasks < 1 or restarts < 1 or n_queries < 1:
        raise ValueError('n_tasks, n_queries and restarts must be positive')
    seeds = seedSequence(rng).spawn(n_tasks * restarts)
    jobs = [(model, split, ways, shots, n_queries, s) for s in seeds]
    if workers > 1:
        with Pool(processes=workers) as pool:
            outcomes = pool.map(_taskOutcome, jobs)
    else:
        outcomes = [_taskOutcome(job) for job in jobs]
    accs = np.asarray([a for a, _ in outcomes], dtype=float)
    result = EvalResult(accuracy=float(accs.mean()),
                        ci=confidenceInterval(accs),
                        per_task=accs,
                        restart_means=accs.reshape(restarts, n_tasks).mean(
                            axis=1),
                        loss=float(np.mean([l for _, l in outcomes])))
    logger.debug('Evaluated %d tasks on %s: %s', accs.size, split.name,
                 result)
    return result
