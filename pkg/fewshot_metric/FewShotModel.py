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

import copy
import logging

import numpy as np

from .embedding import (ExtractorConfig, TenConfig,
                        TaskEmbeddingNetwork, makeExtractor,
                        tenMagnitudeReport)
from .metric import ScaledMetricHead
from .numerics import ParameterLayout, ParameterVector
from .numerics import tapeOps as ops
from . import splitID

logger = logging.getLogger('fewShot')


class FewShotModel(object):

    """

    Few-shot classifier built from a feature extractor, an optional task
    embedding network, a scaled metric head and an optional auxiliary
    linear logit head.

    All trainable values live in one ParameterVector (self.params) laid out
    as extractor segments, TEN segments, log(alpha) when alpha is
    trainable, then the auxiliary head.

    """

    def __init__(self, extractor_config=None, ten_config=None, head=None,
                 aux_classes=0, rng=None):
        """
        Constructor. Declares and initializes all parameter segments.

        :param ExtractorConfig extractor_config: Feature extractor
        :param TenConfig ten_config: Task embedding network (disabled when
               omitted)
        :param ScaledMetricHead head: Similarity and temperature
        :param int aux_classes: Label count of the auxiliary head, 0 for
               none
        :param rng: Seed or numpy Generator
        """
        rng = np.random.default_rng(rng)
        self.extractor_config = extractor_config or ExtractorConfig()
        self.ten_config = ten_config or TenConfig()
        self.head = head or ScaledMetricHead()
        self.aux_classes = int(aux_classes)
        # Data normalization and training echo restored from a checkpoint
        self.metadata = {}
        if self.aux_classes < 0:
            raise ValueError('aux_classes must be >= 0')

        self.extractor = makeExtractor(self.extractor_config)
        layout = ParameterLayout()
        self.extractor.declare(layout)

        self.ten = None
        if self.ten_config.enabled:
            self.ten = TaskEmbeddingNetwork(self.ten_config,
                                            self.extractor.conditionedLayers(),
                                            self.extractor.outputDim)
            self.ten.declare(layout)

        if self.head.trainable:
            layout.add(splitID.SEG_LOG_ALPHA, ())
        if self.aux_classes:
            layout.add(splitID.SEG_AUX_W,
                       (self.aux_classes, self.extractor.outputDim))
            layout.add(splitID.SEG_AUX_B, (self.aux_classes,))

        self.params = ParameterVector(layout)
        # Extractor first: its initial values do not depend on the TEN
        self.extractor.initialize(self.params, rng)
        if self.ten is not None:
            self.ten.initialize(self.params, rng)
        if self.head.trainable:
            self.params[splitID.SEG_LOG_ALPHA] = np.log(self.head.alpha)
        if self.aux_classes:
            dim = self.extractor.outputDim
            self.params[splitID.SEG_AUX_W] = rng.normal(
                0.0, np.sqrt(1.0 / dim), size=(self.aux_classes, dim))
        logger.debug('Model with %d parameters in %d segments',
                     layout.size, len(layout))

    @property
    def layout(self):
        return self.params.layout

    @property
    def hasTen(self):
        return self.ten is not None

    def segments(self, params=None):
        return (params if params is not None else self.params).segments()

    def alpha(self, segments):
        """
        Temperature, a Variable when alpha is trainable and segments are
        recorded.
        """
        if self.head.trainable:
            return ops.exp(segments[splitID.SEG_LOG_ALPHA])
        return self.head.alpha

    def currentAlpha(self):
        return float(ops.value(self.alpha(self.params.segments())))

    def weightDecay(self, segments):
        coeff = self.extractor_config.weight_decay
        if coeff == 0:
            return 0.0
        total = 0.0
        for name in self.extractor.weightSegments():
            total = ops.add(total, ops.reduceSum(ops.square(segments[name])))
        return ops.multiply(coeff, total)

    def tenPenalty(self, segments):
        if self.ten is None:
            return 0.0
        return self.ten.penalty(segments)

    def penalty(self, segments):
        """
        Weight decay plus the gamma0/beta0 penalty.
        """
        return ops.add(self.weightDecay(segments), self.tenPenalty(segments))

    def auxLogits(self, segments, z):
        if not self.aux_classes:
            raise ValueError('Model has no auxiliary head')
        return ops.add(ops.matmul(z, ops.transpose(segments[
            splitID.SEG_AUX_W])), segments[splitID.SEG_AUX_B])

    def withAlpha(self, alpha):
        """
        Shallow copy sharing the parameters but using a fixed temperature.
        """
        other = copy.copy(self)
        other.head = ScaledMetricHead(self.head.kind, alpha, trainable=False)
        return other

    def snapshot(self):
        return (self.params.copy(), copy.deepcopy(self.extractor.runningStats))

    def restore(self, snapshot):
        params, stats = snapshot
        self.params = params.copy()
        self.extractor.runningStats = copy.deepcopy(stats)

    def tenReport(self):
        """
        :return: |gamma0|, |beta0| per conditioned layer, shallowest first
        :rtype: pandas.DataFrame
        """
        if self.ten is None:
            raise ValueError('Model has no task embedding network')
        return tenMagnitudeReport(self.ten, self.params)

    def configEcho(self):
        return {'extractor': self.extractor_config.toDict(),
                'ten': self.ten_config.toDict(),
                'head': self.head.toDict(),
                'aux_classes': self.aux_classes}

    @classmethod
    def fromEcho(cls, echo, rng=None):
        return cls(ExtractorConfig.fromDict(echo['extractor']),
                   TenConfig.fromDict(echo['ten']),
                   ScaledMetricHead.fromDict(echo['head']),
                   echo['aux_classes'], rng)

    def __repr__(self):
        return 'FewShotModel(%s, ten=%s, %r)' % (
            self.extractor_config.kind, self.hasTen, self.head)
