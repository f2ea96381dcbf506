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

from collections import OrderedDict

import numpy as np

from ..numerics import tapeOps as ops


class ShapeError(ValueError):
    pass


class FilmParams(object):

    """
    Per conditioned layer scale and shift vectors, shallowest layer first.
    Entries may be plain arrays or tape Variables.
    """

    def __init__(self, layers=None):
        self.layers = OrderedDict(layers or ())

    @classmethod
    def identity(cls, conditioned_layers):
        """
        gamma = 1, beta = 0 for every (name, width) pair.
        """
        return cls((name, (np.ones(width), np.zeros(width)))
                   for name, width in conditioned_layers)

    def names(self):
        return list(self.layers.keys())

    def gamma(self, name):
        return self.layers[name][0]

    def beta(self, name):
        return self.layers[name][1]

    def numpy(self):
        return FilmParams((name, (np.array(ops.value(g)),
                                  np.array(ops.value(b))))
                          for name, (g, b) in self.layers.items())

    def __contains__(self, name):
        return name in self.layers

    def __getitem__(self, name):
        return self.layers[name]

    def __len__(self):
        return len(self.layers)

    def __repr__(self):
        return 'FilmParams(%s)' % ', '.join(self.layers.keys())


def filmApply(h, gamma, beta):
    '''
    Channel-wise affine transform gamma * h + beta.

    The channel axis is 1 for batched activations (dense or NCHW) and 0 for
    a single activation vector; gamma and beta broadcast over the spatial
    positions of convolutional layers.
    '''
    hv, gv, bv = ops.value(h), ops.value(gamma), ops.value(beta)
    axis = 1 if hv.ndim >= 2 else 0
    channels = hv.shape[axis]
    if gv.shape != (channels,) or bv.shape != (channels,):
        raise ShapeError('FILM vectors of shape %s/%s do not match %d '
                         'channels' % (gv.shape, bv.shape, channels))
    if hv.ndim > 2:
        shape = (1, channels) + (1,) * (hv.ndim - 2)
        gamma = ops.reshape(gamma, shape)
        beta = ops.reshape(beta, shape)
    return ops.add(ops.multiply(h, gamma), beta)
