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


import numpy as np


class MomentumSGD(object):

    """
    SGD with momentum on a flat parameter vector:

        v <- momentum * v + grad
        params <- params - lr * v

    With momentum 0 one step moves the parameters by exactly -lr * grad.
    """

    def __init__(self, size, momentum=0.9):
        if not 0 <= momentum < 1:
            raise ValueError('momentum must lie in [0, 1), got %r' % momentum)
        self.momentum = float(momentum)
        self.velocity = np.zeros(int(size))

    def step(self, params, grad, lr):
        """
        Update params.values in place.

        :param ParameterVector params: Parameters
        :param GradientVector grad: Gradient laid out like params
        :param float lr: Learning rate
        """
        if grad.layout != params.layout:
            raise ValueError('Gradient layout does not match parameters')
        if self.momentum:
            self.velocity = self.momentum * self.velocity + grad.values
        else:
            self.velocity = grad.values.copy()
        params.values -= lr * self.velocity

    def reset(self):
        self.velocity[:] = 0.0
