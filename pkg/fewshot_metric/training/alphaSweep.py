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


from dataclasses import replace
import logging

import pandas as pd

from .evaluation import evaluate
from .trainer import train

logger = logging.getLogger('fewShot.training')

SWEEP_COLUMNS = ['alpha', 'val_acc', 'val_ci', 'val_loss']


class SweepResult(object):

    """
    Sweep table. The best row has the highest validation accuracy, ties
    broken by the lower validation loss; a cheap sweep ranks by loss only.
    """

    def __init__(self, table, cheap=False):
        self.table = table
        self.cheap = cheap

    def _bestIndex(self):
        if self.cheap:
            return self.table.val_loss.idxmin()
        ranked = self.table.sort_values(['val_acc', 'val_loss'],
                                        ascending=[False, True],
                                        kind='mergesort')
        return ranked.index[0]

    @property
    def bestAlpha(self):
        return float(self.table.alpha[self._bestIndex()])

    @property
    def bestRow(self):
        return self.table.loc[self._bestIndex()]

    def toCsv(self, path_or_buf=None):
        return self.table.to_csv(path_or_buf, index=False)


def sweepAlpha(config, grid, train_split, val_split, makeModel=None,
               model=None, cheap=False, n_tasks=500, n_queries=None,
               workers=1):
    """
    Validation accuracy and loss for every temperature of a grid.

    In full mode a fresh model is built with makeModel(alpha) and trained
    for every grid value. In cheap mode the given trained model is only
    evaluated with each alpha fixed; its predictions do not depend on
    alpha, so there the loss column carries the alpha dependence.

    All grid values are evaluated on the same validation tasks.

    :param TrainConfig config: Training configuration
    :param grid: Positive alpha values
    :param callable makeModel: alpha -> untrained FewShotModel (full mode)
    :param FewShotModel model: Trained model (cheap mode)
    :rtype: SweepResult
    """
    grid = [float(a) for a in grid]
    if not grid:
        raise ValueError('alpha grid is empty')
    if any(not a > 0 for a in grid):
        raise ValueError('alpha grid values must be positive')
    if cheap and model is None:
        raise ValueError('cheap sweep needs a trained model')
    if not cheap and makeModel is None:
        raise ValueError('full sweep needs a model factory')
    n_queries = n_queries or config.queries_per_task

    rows = []
    for alpha in grid:
        if cheap:
            candidate = model.withAlpha(alpha)
        else:
            candidate, _ = train(makeModel(alpha),
                                 replace(config, alpha=alpha),
                                 train_split, val_split)
        result = evaluate(candidate, val_split, n_tasks=n_tasks,
                          n_queries=n_queries, rng=[config.seed, 2],
                          ways=config.ways, shots=config.shots,
                          workers=workers)
        logger.info('alpha=%g val acc %s loss %.4f', alpha, result,
                    result.loss)
        rows.append((alpha, result.accuracy, result.ci, result.loss))
    return SweepResult(pd.DataFrame(rows, columns=SWEEP_COLUMNS), cheap)
