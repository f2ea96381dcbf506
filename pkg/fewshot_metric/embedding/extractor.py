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
Feature extractors f_phi.

An extractor owns no parameter values: it declares named segments on a
ParameterLayout, initializes them inside a ParameterVector and is then
called with a mapping segment name -> array (or tape Variable). All
segment names carry the 'extractor/' prefix.
"""

from collections import OrderedDict
from dataclasses import dataclass, field, asdict
import logging

import numpy as np

from ..numerics import ParameterLayout, ParameterVector
from ..numerics import tapeOps as ops
from .film import ShapeError, filmApply

logger = logging.getLogger('fewShot.embedding')

### Extractor kinds ###
LINEAR = 'linear'
MLP = 'mlp'
MINI_RESNET = 'mini-resnet'
EXTRACTOR_KINDS = (LINEAR, MLP, MINI_RESNET)
#######################

NORMALIZATION_MODES = ('batch', 'frozen', 'none')
NORM_SCOPES = ('combined', 'separate')

PREFIX = 'extractor/'
NORM_EPS = 1e-5
NORM_MOMENTUM = 0.1


@dataclass
class ExtractorConfig:
    kind: str = LINEAR
    input_shape: tuple = (4,)
    embedding_dim: int = 4
    hidden_widths: tuple = (32,)
    bias: bool = False
    blocks: int = 2
    depth: int = 3
    base_filters: int = 8
    # One flag per conditionable layer, None conditions all of them
    conditioned: tuple = None
    weight_decay: float = 0.0005
    normalization: str = 'batch'
    norm_scope: str = 'combined'
    output_scale: float = 1.0

    def __post_init__(self):
        self.input_shape = tuple(int(s) for s in self.input_shape)
        self.hidden_widths = tuple(int(w) for w in self.hidden_widths)
        if self.conditioned is not None:
            self.conditioned = tuple(bool(c) for c in self.conditioned)

    def validate(self):
        if self.kind not in EXTRACTOR_KINDS:
            raise ValueError('Unknown extractor kind %r' % self.kind)
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError('Unknown normalization %r' % self.normalization)
        if self.norm_scope not in NORM_SCOPES:
            raise ValueError('Unknown norm_scope %r' % self.norm_scope)
        if not self.input_shape or min(self.input_shape) <= 0:
            raise ShapeError('Invalid input shape %s' % (self.input_shape,))
        if self.embedding_dim <= 0 or any(w <= 0 for w in self.hidden_widths):
            raise ValueError('Layer widths must be positive')
        if self.blocks <= 0 or self.depth <= 0 or self.base_filters <= 0:
            raise ValueError('blocks, depth and base_filters must be '
                             'positive')
        if self.weight_decay < 0:
            raise ValueError('weight_decay must be >= 0')
        if not np.isfinite(self.output_scale) or self.output_scale <= 0:
            raise ValueError('output_scale must be positive')
        return self

    def toDict(self):
        d = asdict(self)
        for key in ('input_shape', 'hidden_widths', 'conditioned'):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    @classmethod
    def fromDict(cls, d):
        return cls(**d)


def _heNormal(rng, shape, fan_in):
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def _lecunNormal(rng, shape, fan_in):
    return rng.normal(0.0, np.sqrt(1.0 / fan_in), size=shape)


class Extractor(object):

    """
    Base class of the feature extractors.

    Subclasses list their segments in _segmentSpecs() as
    (name, shape, init, fan_in) with init in {'he', 'lecun', 'zeros'} and
    their conditionable layers in _layerWidths().
    """

    def __init__(self, config):
        self.config = config.validate()
        # Normalization layer name -> (running mean, running variance)
        self.runningStats = OrderedDict()
        flags = config.conditioned
        layers = self._layerWidths()
        if flags is not None and len(flags) != len(layers):
            raise ValueError('Expected %d conditioning flags, got %d' %
                             (len(layers), len(flags)))
        self._conditioned = [lw for i, lw in enumerate(layers)
                             if flags is None or flags[i]]

    def _segmentSpecs(self):
        raise NotImplementedError

    def _layerWidths(self):
        raise NotImplementedError

    def _normLayers(self):
        return []

    @property
    def outputDim(self):
        raise NotImplementedError

    def declare(self, layout):
        for name, shape, _, _ in self._segmentSpecs():
            layout.add(PREFIX + name, shape)

    def initialize(self, params, rng=None):
        rng = np.random.default_rng(rng)
        for name, shape, init, fan_in in self._segmentSpecs():
            if init == 'he':
                params[PREFIX + name] = _heNormal(rng, shape, fan_in)
            elif init == 'lecun':
                params[PREFIX + name] = _lecunNormal(rng, shape, fan_in)
            else:
                params[PREFIX + name] = np.zeros(shape)
        self.resetRunningStats()

    def resetRunningStats(self):
        self.runningStats = OrderedDict(
            (name, (np.zeros(width), np.ones(width)))
            for name, width in self._normLayers())

    def conditionedLayers(self):
        """
        :return: (layer name, channel count) of every conditioned layer,
                 shallowest first
        """
        return list(self._conditioned)

    def weightSegments(self):
        """
        Segments subject to weight decay (weights, not biases).
        """
        return [PREFIX + name for name, _, init, _ in self._segmentSpecs()
                if init != 'zeros']

    def checkInput(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim < 1 or tuple(x.shape[1:]) != self.config.input_shape:
            raise ShapeError('Expected inputs of shape (n, %s), got %s' % (
                ', '.join(str(s) for s in self.config.input_shape),
                x.shape))
        return x

    def _film(self, name, h, film):
        if film is not None and name in film:
            gamma, beta = film[name]
            return filmApply(h, gamma, beta)
        return h

    def _scale(self, z):
        if self.config.output_scale != 1.0:
            return ops.multiply(z, self.config.output_scale)
        return z

    def __call__(self, segments, x, film=None, training=False):
        raise NotImplementedError


class LinearExtractor(Extractor):

    """
    z = W x (+ b), optionally FILM conditioned on the output.
    """

    def _inputDim(self):
        return int(np.prod(self.config.input_shape))

    def _segmentSpecs(self):
        c = self.config
        specs = [('linear/W', (c.embedding_dim, self._inputDim()), 'lecun',
                  self._inputDim())]
        if c.bias:
            specs.append(('linear/b', (c.embedding_dim,), 'zeros', 1))
        return specs

    def _layerWidths(self):
        return [('linear', self.config.embedding_dim)]

    @property
    def outputDim(self):
        return self.config.embedding_dim

    def __call__(self, segments, x, film=None, training=False):
        x = self.checkInput(x).reshape(len(x), -1)
        h = ops.matmul(x, ops.transpose(segments[PREFIX + 'linear/W']))
        if self.config.bias:
            h = ops.add(h, segments[PREFIX + 'linear/b'])
        return self._scale(self._film('linear', h, film))


class MlpExtractor(LinearExtractor):

    """
    Hidden affine layers with FILM and swish, then a linear readout.
    """

    def _segmentSpecs(self):
        c = self.config
        specs = []
        width = self._inputDim()
        for i, hidden in enumerate(c.hidden_widths):
            specs.append(('mlp/fc%d/W' % i, (hidden, width), 'he', width))
            if c.bias:
                specs.append(('mlp/fc%d/b' % i, (hidden,), 'zeros', 1))
            width = hidden
        specs.append(('mlp/out/W', (c.embedding_dim, width), 'lecun', width))
        if c.bias:
            specs.append(('mlp/out/b', (c.embedding_dim,), 'zeros', 1))
        return specs

    def _layerWidths(self):
        return [('mlp/fc%d' % i, w)
                for i, w in enumerate(self.config.hidden_widths)]

    def _affine(self, segments, name, h):
        h = ops.matmul(h, ops.transpose(segments[PREFIX + name + '/W']))
        if self.config.bias:
            h = ops.add(h, segments[PREFIX + name + '/b'])
        return h

    def __call__(self, segments, x, film=None, training=False):
        h = self.checkInput(x).reshape(len(x), -1)
        for i in range(len(self.config.hidden_widths)):
            name = 'mlp/fc%d' % i
            h = ops.swish(self._film(name, self._affine(segments, name, h),
                                     film))
        return self._scale(self._affine(segments, 'mlp/out', h))


class MiniResNetExtractor(Extractor):

    '''
    Residual blocks of `depth` 3x3 convolutions, each followed by
    normalization, FILM and swish (no swish after the last convolution of a
    block). A 1x1 convolution shortcut is added before the final swish,
    then 2x2 max pooling. Filters double per block; a global average pool
    produces the embedding.
    '''

    def __init__(self, config):
        shape = tuple(config.input_shape)
        if len(shape) != 3:
            raise ShapeError('mini-resnet expects (C, H, W) inputs, got %s' %
                             (shape,))
        factor = 2 ** config.blocks
        if shape[1] % factor or shape[2] % factor:
            raise ShapeError('Input %dx%d is not divisible by 2^%d' %
                             (shape[1], shape[2], config.blocks))
        super(MiniResNetExtractor, self).__init__(config)

    def _filters(self, block):
        return self.config.base_filters * 2 ** block

    def _segmentSpecs(self):
        c = self.config
        specs = []
        channels = c.input_shape[0]
        for b in range(c.blocks):
            filters = self._filters(b)
            width = channels
            for l in range(c.depth):
                specs.append(('resnet/block%d/conv%d/W' % (b, l),
                              (filters, width, 3, 3), 'he', width * 9))
                width = filters
            specs.append(('resnet/block%d/shortcut/W' % b,
                          (filters, channels, 1, 1), 'he', channels))
            channels = filters
        return specs

    def _layerWidths(self):
        return [('resnet/block%d/conv%d' % (b, l), self._filters(b))
                for b in range(self.config.blocks)
                for l in range(self.config.depth)]

    def _normLayers(self):
        if self.config.normalization == 'none':
            return []
        names = []
        for b in range(self.config.blocks):
            names.extend(('resnet/block%d/conv%d' % (b, l), self._filters(b))
                         for l in range(self.config.depth))
            names.append(('resnet/block%d/shortcut' % b, self._filters(b)))
        return names

    @property
    def outputDim(self):
        return self._filters(self.config.blocks - 1)

    def _normalize(self, name, h, training):
        mode = self.config.normalization
        if mode == 'none':
            return h
        if mode == 'frozen' and not training:
            mean, var = self.runningStats[name]
            scale = 1.0 / np.sqrt(var + NORM_EPS)
            return ops.multiply(ops.subtract(h, mean.reshape(1, -1, 1, 1)),
                                scale.reshape(1, -1, 1, 1))
        mu = ops.reduceMean(h, axis=(0, 2, 3), keepdims=True)
        centered = ops.subtract(h, mu)
        var = ops.reduceMean(ops.square(centered), axis=(0, 2, 3),
                             keepdims=True)
        if mode == 'frozen':
            mean, running = self.runningStats[name]
            self.runningStats[name] = (
                (1 - NORM_MOMENTUM) * mean +
                NORM_MOMENTUM * ops.value(mu).reshape(-1),
                (1 - NORM_MOMENTUM) * running +
                NORM_MOMENTUM * ops.value(var).reshape(-1))
        return ops.divide(centered, ops.sqrt(ops.add(var, NORM_EPS)))

    def __call__(self, segments, x, film=None, training=False):
        h = self.checkInput(x)
        for b in range(self.config.blocks):
            block = 'resnet/block%d' % b
            shortcut = ops.conv2d(h, segments[PREFIX + block + '/shortcut/W'],
                                  padding=0)
            shortcut = self._normalize(block + '/shortcut', shortcut,
                                       training)
            out = h
            for l in range(self.config.depth):
                name = '%s/conv%d' % (block, l)
                out = ops.conv2d(out, segments[PREFIX + name + '/W'])
                out = self._film(name, self._normalize(name, out, training),
                                 film)
                if l < self.config.depth - 1:
                    out = ops.swish(out)
            h = ops.maxPool2d(ops.swish(ops.add(out, shortcut)), 2)
        return self._scale(ops.globalAvgPool(h))


_EXTRACTORS = {LINEAR: LinearExtractor,
               MLP: MlpExtractor,
               MINI_RESNET: MiniResNetExtractor}


def makeExtractor(config):
    config.validate()
    return _EXTRACTORS[config.kind](config)


def buildExtractor(config, rng=None):
    """
    Create an extractor and its initialized parameters.

    :param ExtractorConfig config: Extractor configuration
    :param rng: Seed or numpy Generator
    :return: (extractor, ParameterVector)
    """
    extractor = makeExtractor(config)
    layout = ParameterLayout()
    extractor.declare(layout)
    params = ParameterVector(layout)
    extractor.initialize(params, rng)
    logger.debug('Built %s extractor with %d parameters', config.kind,
                 layout.size)
    return extractor, params


def embed(extractor, params, x, film=None, training=False):
    """
    Embed a batch of inputs.

    :param Extractor extractor: Feature extractor
    :param params: ParameterVector or segment mapping
    :param x: (n, *input_shape) inputs
    :param FilmParams film: Conditioning, identity when omitted
    :return: (n, D_z) embeddings
    """
    segments = params.segments() if isinstance(params, ParameterVector) \
        else params
    return extractor(segments, x, film=film, training=training)
