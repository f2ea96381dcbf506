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
import pytest

from fewshot_metric.numerics import (GradientVector, ParameterLayout,
                                     ParameterVector)
from fewshot_metric.training import MomentumSGD, auxProbability, learningRate


def test_aux_probability_decay():
    T = 30000
    assert auxProbability(0, T) == 0.9
    assert np.isclose(auxProbability(1500, T), 0.81)
    assert np.isclose(auxProbability(1499, T), 0.9)
    assert np.isclose(auxProbability(T - 1, T), 0.9 * 0.9 ** 19)
    values = [auxProbability(t, T) for t in range(0, T, 100)]
    assert np.all(np.diff(values) <= 0)
    assert auxProbability(0, T, p0=0.5) == 0.5


def test_learning_rate_annealing():
    T = 30000
    assert learningRate(0, T) == 0.1
    assert learningRate(14999, T) == 0.1
    assert np.isclose(learningRate(15000, T), 0.01)
    assert np.isclose(learningRate(17500, T), 0.001)
    assert np.isclose(learningRate(20000, T), 0.0001)
    assert np.isclose(learningRate(T - 1, T), 0.0001)


def test_schedules_reject_bad_index():
    for t, T in ((-1, 10), (10, 10), (0, 0)):
        with pytest.raises(ValueError):
            learningRate(t, T)
        with pytest.raises(ValueError):
            auxProbability(t, T)


def _vectors(values, grad):
    layout = ParameterLayout()
    layout.add('w', (len(values),))
    return (ParameterVector(layout, values),
            GradientVector(layout, grad))


def test_sgd_without_momentum():
    params, grad = _vectors([1.0, 2.0], [0.5, -1.0])
    MomentumSGD(2, momentum=0.0).step(params, grad, 0.1)
    assert np.allclose(params.values, [0.95, 2.1])


def test_sgd_momentum_accumulates():
    params, grad = _vectors([0.0], [1.0])
    opt = MomentumSGD(1, momentum=0.9)
    opt.step(params, grad, 1.0)
    opt.step(params, grad, 1.0)
    assert np.allclose(params.values, [-(1.0 + 1.9)])
    opt.reset()
    assert np.all(opt.velocity == 0.0)


def test_sgd_rejects_foreign_layout():
    params, _ = _vectors([0.0, 0.0], [0.0, 0.0])
    _, grad = _vectors([0.0], [1.0])
    with pytest.raises(ValueError):
        MomentumSGD(2).step(params, grad, 0.1)
    with pytest.raises(ValueError):
        MomentumSGD(2, momentum=1.0)


def test_first_drop_lands_at_half_budget():
    assert learningRate(4999, 10000) == 0.1
    assert learningRate(5000, 10000) == 0.01
