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
Episodic training with auxiliary co-training, learning-rate annealing and
early stopping on validation accuracy.
"""

from dataclasses import dataclass, asdict
import logging

import numpy as np
import pandas as pd

from ..episodes import REDUCTIONS, episodeLossProgram, sampleEpisode
from ..numerics import NumericalFailure, valueAndGrad
from ..numerics import tapeOps as ops
from .evaluation import evaluate
from .optimizer import MomentumSGD
from .schedules import auxProbability, learningRate

logger = logging.getLogger('fewShot.training')

METRICS_COLUMNS = ['t', 'train_loss', 'val_acc', 'val_ci', 'lr', 'aux_p']
ALPHA_MODES = ('fixed', 'trainable', 'sweep')

# shots -> (tasks per batch, queries per task)
SHOT_DEFAULTS = {1: (5, 12), 5: (2, 32), 10: (1, 64)}


class TrainingDivergence(ArithmeticError):

    def __init__(self, message, step):
        super(TrainingDivergence, self).__init__(message)
        self.step = step


def defaultTasksPerBatch(shots):
    return SHOT_DEFAULTS.get(shots, (1, None))[0]


def defaultQueries(ways, shots):
    return SHOT_DEFAULTS.get(shots, (None, ways * shots))[1]


@dataclass
class TrainConfig:
    ways: int = 5
    shots: int = 5
    tasks_per_batch: int = None
    queries_per_task: int = None
    episodes: int = 30000
    momentum: float = 0.9
    lr0: float = 0.1
    lr_anneal_every: int = 2500
    aux_enabled: bool = False
    aux_p0: float = 0.9
    aux_decay_steps: int = 20
    aux_batch: int = 64
    alpha_mode: str = 'fixed'
    alpha: float = 1.0
    alpha_grid: tuple = (0.01, 0.1, 1.0, 10.0, 100.0)
    loss_reduction: str = 'mean'
    val_every: int = 200
    val_tasks: int = 100
    patience: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.tasks_per_batch is None:
            self.tasks_per_batch = defaultTasksPerBatch(self.shots)
        if self.queries_per_task is None:
            self.queries_per_task = defaultQueries(self.ways, self.shots)
        self.alpha_grid = tuple(float(a) for a in self.alpha_grid)

    def validate(self):
        if self.episodes <= 0:
            raise ValueError('episodes must be positive')
        if self.ways < 2 or self.shots < 1:
            raise ValueError('Need ways >= 2 and shots >= 1')
        if self.tasks_per_batch < 1 or self.queries_per_task < 1:
            raise ValueError('tasks_per_batch and queries_per_task must be '
                             'positive')
        if not 0 < self.aux_p0 <= 1:
            raise ValueError('aux_p0 must lie in (0, 1]')
        if self.aux_decay_steps < 0 or self.aux_batch < 1:
            raise ValueError('Invalid auxiliary schedule')
        if self.alpha_mode not in ALPHA_MODES:
            raise ValueError('Unknown alpha mode %r' % self.alpha_mode)
        if not self.alpha > 0 or not all(a > 0 for a in self.alpha_grid):
            raise ValueError('alpha values must be positive')
        if not self.alpha_grid:
            raise ValueError('alpha grid is empty')
        if self.loss_reduction not in REDUCTIONS:
            raise ValueError('Unknown loss reduction %r' %
                             self.loss_reduction)
        if self.val_every < 1 or self.val_tasks < 1 or self.patience < 0:
            raise ValueError('Invalid validation settings')
        if self.lr0 <= 0 or not 0 <= self.momentum < 1:
            raise ValueError('Invalid optimizer settings')
        return self

    def toDict(self):
        d = asdict(self)
        d['alpha_grid'] = list(self.alpha_grid)
        return d

    @classmethod
    def fromDict(cls, d):
        return cls(**d)


class MetricsLog(object):

    """
    One row per evaluation point, in increasing episode index.
    """

    def __init__(self):
        self.rows = []

    def append(self, t, train_loss, val_acc, val_ci, lr, aux_p):
        if self.rows and t <= self.rows[-1][0]:
            raise ValueError('Episode index %d is not after %d' %
                             (t, self.rows[-1][0]))
        self.rows.append((int(t), float(train_loss), float(val_acc),
                          float(val_ci), float(lr), float(aux_p)))

    def frame(self):
        return pd.DataFrame(self.rows, columns=METRICS_COLUMNS)

    def toCsv(self, path_or_buf=None):
        return self.frame().to_csv(path_or_buf, index=False, na_rep='nan')

    def bestRow(self):
        df = self.frame()
        if df.empty or df.val_acc.isna().all():
            return None
        return df.loc[df.val_acc.idxmax()]

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, MetricsLog) and self.frame().equals(
            other.frame())


class AuxPool(object):

    """
    Training records with their auxiliary labels.
    """

    def __init__(self, split, aux_labels=None):
        class_ids = sorted(int(c) for c in split.class_ids)
        if aux_labels is None:
            aux_labels = dict((c, i) for i, c in enumerate(class_ids))
        missing = [c for c in class_ids if c not in aux_labels]
        if missing:
            raise ValueError('Auxiliary label space misses classes %s' %
                             missing)
        self.inputs = split.store.inputs
        ids = [split.store.classIndex(c) for c in class_ids]
        self.records = np.concatenate(ids)
        self.labels = np.concatenate([np.full(len(i), aux_labels[c])
                                      for c, i in zip(class_ids, ids)])
        self.n_classes = int(max(aux_labels.values())) + 1

    def batch(self, size, rng):
        pick = rng.choice(self.records.size, size=min(size,
                                                      self.records.size),
                          replace=False)
        return self.inputs[self.records[pick]], self.labels[pick]


def auxLossProgram(model, x, y):
    """
    Mean cross-entropy of the auxiliary logit head on unconditioned
    embeddings, plus the model penalties.
    """
    y = np.asarray(y, dtype=int)

    def program(segments):
        z = model.extractor(segments, x, None, True)
        logits = model.auxLogits(segments, z)
        picked = ops.getitem(logits, (np.arange(y.size), y))
        ce = ops.reduceMean(ops.subtract(ops.logsumexp(logits, axis=1),
                                         picked))
        return ops.add(ce, model.penalty(segments))
    return program


def episodicLossProgram(model, episodes, reduction):
    '''
    Average of the episode losses plus the model penalties.
    '''
    programs = [episodeLossProgram(model, ep, reduction, training=True,
                                   with_penalty=False) for ep in episodes]

    def program(segments):
        total = 0.0
        for p in programs:
            total = ops.add(total, p(segments))
        return ops.add(ops.divide(total, float(len(programs))),
                       model.penalty(segments))
    return program


def _step(model, optimizer, program, t, lr):
    try:
        loss, grad = valueAndGrad(program, model.params)
    except NumericalFailure as e:
        raise TrainingDivergence('Non-finite loss at step %d (%s)' % (t, e),
                                 step=t)
    if not np.isfinite(loss):
        raise TrainingDivergence('Non-finite loss at step %d' % t, step=t)
    optimizer.step(model.params, grad, lr)
    return loss


def train(model, config, train_split, val_split=None, aux_labels=None,
          rng=None):
    """
    Train a model in place.

    Every step draws u in [0, 1). With u below the auxiliary probability one
    auxiliary classification step is taken; otherwise tasks_per_batch
    episodes are sampled and their averaged loss is minimized. Validation
    accuracy is measured every config.val_every episodes and the best
    validated parameters are restored at the end.

    :param FewShotModel model: Model, updated in place
    :param TrainConfig config: Training configuration
    :param DatasetSplit train_split: Training classes
    :param DatasetSplit val_split: Validation classes, None to skip
           validation
    :param dict aux_labels: Training class id -> auxiliary label
    :param rng: Seed or Generator, config.seed when omitted
    :return: (model, MetricsLog)
    :raises TrainingDivergence: on a non-finite loss or gradient
    """
    config.validate()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    aux = None
    if config.aux_enabled:
        aux = AuxPool(train_split, aux_labels)
        if model.aux_classes < aux.n_classes:
            raise ValueError('Model auxiliary head has %d classes, %d '
                             'needed' % (model.aux_classes, aux.n_classes))

    optimizer = MomentumSGD(model.layout.size, config.momentum)
    log = MetricsLog()
    T = config.episodes
    best_acc, best, stale = -np.inf, None, 0
    losses = []
    logger.info('Training %d-way %d-shot for %d episodes (%d tasks x %d '
                'queries per batch)', config.ways, config.shots, T,
                config.tasks_per_batch, config.queries_per_task)

    for t in range(T):
        lr = learningRate(t, T, config.lr0, config.lr_anneal_every)
        aux_p = (auxProbability(t, T, config.aux_p0, config.aux_decay_steps)
                 if aux is not None else 0.0)
        if rng.random() < aux_p:
            x, y = aux.batch(config.aux_batch, rng)
            loss = _step(model, optimizer, auxLossProgram(model, x, y), t, lr)
            logger.debug('t=%d aux loss %.6f', t, loss)
        else:
            episodes = [sampleEpisode(train_split, config.ways, config.shots,
                                      rng=rng,
                                      query_total=config.queries_per_task)
                        for _ in range(config.tasks_per_batch)]
            loss = _step(model, optimizer,
                         episodicLossProgram(model, episodes,
                                             config.loss_reduction), t, lr)
            losses.append(loss)
            logger.debug('t=%d episodic loss %.6f', t, loss)

        if (t + 1) % config.val_every and t != T - 1:
            continue
        train_loss = np.mean(losses) if losses else np.nan
        losses = []
        if val_split is None:
            log.append(t, train_loss, np.nan, np.nan, lr, aux_p)
            continue
        result = evaluate(model, val_split, n_tasks=config.val_tasks,
                          n_queries=config.queries_per_task,
                          rng=[config.seed, 1], ways=config.ways,
                          shots=config.shots)
        log.append(t, train_loss, result.accuracy, result.ci, lr, aux_p)
        logger.info('t=%d train loss %.4f val acc %s', t, train_loss, result)
        if result.accuracy > best_acc:
            best_acc, best, stale = result.accuracy, model.snapshot(), 0
        else:
            stale += 1
            if config.patience and stale >= config.patience:
                logger.warning('Early stopping at episode %d, best val acc '
                               '%.4f', t, best_acc)
                break

    if best is not None:
        model.restore(best)
    return model, log
