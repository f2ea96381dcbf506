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
Task embedding network: predicts FILM scale and shift vectors of every
conditioned extractor layer from the task representation c_bar.

Per conditioned layer two separate predictors are used, one for gamma and
one for beta. Each has three fully connected layers: a projection of c_bar
to the layer width, one residual layer at that width and a zero-initialized
linear readout. The readouts are multiplied by the scalar post-multipliers
gamma0 and beta0:

    gamma = gamma0 * h(c_bar) + 1,   beta = beta0 * g(c_bar)
"""

from dataclasses import dataclass, asdict

import numpy as np
import pandas as pd

from ..numerics import tapeOps as ops
from .film import FilmParams, ShapeError

PREFIX = 'ten/'


@dataclass
class TenConfig:
    enabled: bool = False
    penalty: float = 0.01
    gamma0_init: float = 0.0
    beta0_init: float = 0.0

    def validate(self):
        if self.penalty < 0:
            raise ValueError('TEN penalty must be >= 0')
        if not (np.isfinite(self.gamma0_init) and
                np.isfinite(self.beta0_init)):
            raise ValueError('gamma0/beta0 initial values must be finite')
        return self

    def toDict(self):
        return asdict(self)

    @classmethod
    def fromDict(cls, d):
        return cls(**d)


class TenBlock(object):

    """
    gamma and beta predictors of one conditioned layer.
    """

    def __init__(self, layer, width, input_dim):
        self.layer = layer
        self.width = int(width)
        self.input_dim = int(input_dim)
        self.prefix = PREFIX + layer + '/'

    @property
    def gamma0(self):
        return self.prefix + 'gamma0'

    @property
    def beta0(self):
        return self.prefix + 'beta0'

    def segmentSpecs(self):
        specs = []
        for target in ('gamma', 'beta'):
            p = self.prefix + target
            specs += [(p + '/fc0/W', (self.width, self.input_dim), 'he',
                       self.input_dim),
                      (p + '/fc0/b', (self.width,), 'zeros', 1),
                      (p + '/fc1/W', (self.width, self.width), 'he',
                       self.width),
                      (p + '/fc1/b', (self.width,), 'zeros', 1),
                      (p + '/fc2/W', (self.width, self.width), 'zeros', 1),
                      (p + '/fc2/b', (self.width,), 'zeros', 1)]
        return specs

    def _dense(self, segments, name, h):
        return ops.add(ops.matmul(h, ops.transpose(segments[name + '/W'])),
                       segments[name + '/b'])

    def predictor(self, segments, target, c_bar):
        p = self.prefix + target
        h = ops.swish(self._dense(segments, p + '/fc0', c_bar))
        h = ops.add(h, ops.swish(self._dense(segments, p + '/fc1', h)))
        return ops.reshape(self._dense(segments, p + '/fc2', h),
                           (self.width,))

    def predict(self, segments, c_bar):
        """
        :param c_bar: (1, D_z) task representation
        :return: (gamma, beta)
        """
        gamma = ops.add(ops.multiply(segments[self.gamma0],
                                     self.predictor(segments, 'gamma',
                                                    c_bar)), 1.0)
        beta = ops.multiply(segments[self.beta0],
                            self.predictor(segments, 'beta', c_bar))
        return gamma, beta


class TaskEmbeddingNetwork(object):

    def __init__(self, config, conditioned_layers, input_dim):
        """
        :param TenConfig config: TEN configuration
        :param list conditioned_layers: (name, width) pairs, shallowest first
        :param int input_dim: Dimension of c_bar (embedding dimension)
        """
        self.config = config.validate()
        self.input_dim = int(input_dim)
        self.blocks = [TenBlock(name, width, input_dim)
                       for name, width in conditioned_layers]

    def declare(self, layout):
        for block in self.blocks:
            for name, shape, _, _ in block.segmentSpecs():
                layout.add(name, shape)
            layout.add(block.gamma0, ())
            layout.add(block.beta0, ())

    def initialize(self, params, rng=None):
        rng = np.random.default_rng(rng)
        for block in self.blocks:
            for name, shape, init, fan_in in block.segmentSpecs():
                if init == 'he':
                    params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                                              size=shape)
                else:
                    params[name] = np.zeros(shape)
            params[block.gamma0] = self.config.gamma0_init
            params[block.beta0] = self.config.beta0_init

    def postMultiplierSegments(self):
        return [name for block in self.blocks
                for name in (block.gamma0, block.beta0)]

    def predict(self, segments, c_bar):
        return tenPredict(self, segments, c_bar)

    def penalty(self, segments):
        """
        penalty * sum over layers of (gamma0^2 + beta0^2).
        """
        total = 0.0
        for name in self.postMultiplierSegments():
            total = ops.add(total, ops.square(segments[name]))
        return ops.multiply(self.config.penalty, total)


def tenPredict(ten, segments, c_bar):
    """
    FILM parameters of every conditioned layer for one task.

    :param TaskEmbeddingNetwork ten: Task embedding network
    :param segments: Segment mapping (arrays or Variables)
    :param c_bar: (D_z,) task representation
    :rtype: FilmParams
    """
    width = ops.value(c_bar).size
    if ops.value(c_bar).ndim > 2 or width != ten.input_dim:
        raise ShapeError('Task representation of size %d, TEN expects %d' %
                         (width, ten.input_dim))
    c_bar = ops.reshape(c_bar, (1, ten.input_dim))
    return FilmParams((block.layer, block.predict(segments, c_bar))
                      for block in ten.blocks)


def tenMagnitudeReport(ten, params):
    """
    |gamma0| and |beta0| of every conditioned layer, shallowest first.

    :rtype: pandas.DataFrame
    """
    rows = [(block.layer, i, abs(float(params[block.gamma0])),
             abs(float(params[block.beta0])))
            for i, block in enumerate(ten.blocks)]
    return pd.DataFrame(rows, columns=['layer', 'index', 'gamma0', 'beta0'])
