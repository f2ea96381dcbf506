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
Synthetic benchmark with the superclass structure of FC100.

Superclass centers are Gaussian around the origin, class means are
Gaussian around their superclass center and examples are Gaussian around
their class mean. Splits take whole superclasses, so no fine class is
shared between them.

The last nuisance_dims input coordinates carry no class information, only
noise of scale nuisance_scale. With label_noise > 0 that fraction of the
records of every class is drawn around the mean of another class of the
same superclass.
"""

from collections import OrderedDict
from dataclasses import dataclass, asdict

import numpy as np

from .. import splitID
from .fc100 import superclassSplit
from .labeledStore import LabeledStore


@dataclass
class SynthConfig:
    n_classes: int = 20
    n_superclasses: int = 4
    input_shape: tuple = (4,)
    superclass_scale: float = 3.0
    mean_scale: float = 1.0
    within_scale: float = 0.3
    samples_per_class: int = 60
    # Superclasses given to train, val and test
    split_superclasses: tuple = (2, 1, 1)
    seed: int = 0
    nuisance_dims: int = 0
    nuisance_scale: float = 1.0
    label_noise: float = 0.0

    def __post_init__(self):
        self.input_shape = tuple(int(s) for s in self.input_shape)
        self.split_superclasses = tuple(int(s)
                                        for s in self.split_superclasses)

    def validate(self):
        if self.n_classes <= 0 or self.n_superclasses <= 0:
            raise ValueError('Class and superclass counts must be positive')
        if self.n_classes % self.n_superclasses:
            raise ValueError('%d superclasses do not divide %d classes' %
                             (self.n_superclasses, self.n_classes))
        if not self.input_shape or min(self.input_shape) <= 0:
            raise ValueError('Invalid input shape %s' % (self.input_shape,))
        if self.samples_per_class <= 0:
            raise ValueError('samples_per_class must be positive')
        if min(self.superclass_scale, self.mean_scale, self.within_scale,
               self.nuisance_scale) < 0:
            raise ValueError('Scales must be >= 0')
        if (len(self.split_superclasses) != 3 or
                min(self.split_superclasses) < 1 or
                sum(self.split_superclasses) > self.n_superclasses):
            raise ValueError('split_superclasses %s does not fit %d '
                             'superclasses' % (self.split_superclasses,
                                               self.n_superclasses))
        if not 0 <= self.nuisance_dims < int(np.prod(self.input_shape)):
            raise ValueError('nuisance_dims must leave a signal dimension')
        if not 0 <= self.label_noise < 1:
            raise ValueError('label_noise must lie in [0, 1)')
        if self.label_noise and self.n_classes == self.n_superclasses:
            raise ValueError('label_noise needs two classes per superclass')
        return self

    def toDict(self):
        d = asdict(self)
        d['input_shape'] = list(self.input_shape)
        d['split_superclasses'] = list(self.split_superclasses)
        return d


def synthStore(config, rng=None):
    config.validate()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    dim = int(np.prod(config.input_shape))
    signal = dim - config.nuisance_dims
    per_super = config.n_classes // config.n_superclasses
    centers = config.superclass_scale * rng.standard_normal(
        (config.n_superclasses, dim))
    coarse_of = np.arange(config.n_classes) // per_super
    means = centers[coarse_of] + config.mean_scale * rng.standard_normal(
        (config.n_classes, dim))
    means[:, signal:] = 0.0
    scales = np.full(dim, config.within_scale)
    scales[signal:] = config.nuisance_scale
    fine = np.repeat(np.arange(config.n_classes), config.samples_per_class)
    noise = scales * rng.standard_normal((fine.size, dim))
    source = fine.copy()
    n_noisy = int(round(config.label_noise * config.samples_per_class))
    if n_noisy:
        for c in range(config.n_classes):
            rows = rng.choice(np.flatnonzero(fine == c), size=n_noisy,
                              replace=False)
            # another class of the same superclass
            shift = rng.integers(1, per_super, size=n_noisy)
            first = coarse_of[c] * per_super
            source[rows] = first + (c - first + shift) % per_super
    inputs = means[source] + noise
    return LabeledStore(inputs.reshape((fine.size,) + config.input_shape),
                        fine, coarse_of[fine], name='synthetic')


def synthPartition(config):
    bounds = np.cumsum((0,) + config.split_superclasses)
    return OrderedDict((name, tuple(range(bounds[i], bounds[i + 1])))
                       for i, name in enumerate(splitID.SPLIT_NAMES))


def synthDataset(config, rng=None):
    """
    :param SynthConfig config: Benchmark configuration
    :param rng: Seed or Generator, config.seed when omitted
    :return: (store, OrderedDict of train/val/test DatasetSplits)
    """
    store = synthStore(config, rng)
    return store, superclassSplit(store, synthPartition(config))
