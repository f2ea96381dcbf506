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

from fewshot_metric.numerics import (ParameterLayout, ParameterVector,
                                     NumericalFailure, checkGrad, evaluate,
                                     finiteDiffGrad, valueAndGrad)
from fewshot_metric.numerics import tapeOps as ops


def _params(rng, **shapes):
    layout = ParameterLayout()
    for name, shape in shapes.items():
        layout.add(name, shape)
    return ParameterVector(layout, rng.uniform(-1, 1, layout.size))


def test_layout_segments_are_contiguous():
    layout = ParameterLayout()
    layout.add('a', (2, 3))
    layout.add('b', ())
    layout.add('c', (4,))
    assert layout.size == 11
    assert layout.slice('b') == slice(6, 7)
    assert layout.segmentOf(10) == 'c'
    assert ParameterLayout.fromTable(layout.toTable()) == layout
    with pytest.raises(ValueError):
        layout.add('a', (1,))


def test_parameter_vector_rejects_non_finite():
    layout = ParameterLayout()
    layout.add('w', (2,))
    with pytest.raises(ValueError, match='w'):
        ParameterVector(layout, [1.0, np.nan])


def test_segments_are_views():
    layout = ParameterLayout()
    layout.add('w', (2, 2))
    params = ParameterVector(layout)
    params['w'] = np.eye(2)
    params.segment('w')[0, 1] = 5.0
    assert params.values.tolist() == [1.0, 5.0, 0.0, 1.0]


def test_constant_program_has_zero_gradient(rng):
    params = _params(rng, w=(3,))
    value, grad = valueAndGrad(lambda s: 5.0, params)
    assert value == 5.0
    assert np.all(grad.values == 0.0)


def test_single_coordinate_finite_difference():
    layout = ParameterLayout()
    layout.add('p', ())
    params = ParameterVector(layout, [1.0])
    grad = finiteDiffGrad(lambda s: ops.square(s['p']), params, step=1e-5)
    assert abs(grad.values[0] - 2.0) < 1e-8


def test_finite_difference_rejects_bad_step(rng):
    params = _params(rng, w=(2,))
    with pytest.raises(ValueError):
        finiteDiffGrad(lambda s: ops.reduceSum(s['w']), params, step=0.0)


PROGRAMS = {
    'matmul': lambda s: ops.reduceSum(ops.square(ops.matmul(s['x'],
                                                            s['y']))),
    'arith': lambda s: ops.reduceSum(ops.divide(
        ops.multiply(s['x'], ops.subtract(s['x'], 0.3)),
        ops.add(ops.square(s['x']), 2.0))),
    'exp_log': lambda s: ops.reduceSum(ops.add(
        ops.exp(s['x']), ops.log(ops.add(ops.square(s['x']), 1.0)))),
    'sqrt_power': lambda s: ops.reduceMean(ops.add(
        ops.sqrt(ops.add(ops.square(s['y']), 1.0)), ops.power(s['y'], 3))),
    'activations': lambda s: ops.reduceSum(ops.add(
        ops.swish(s['x']), ops.multiply(ops.sigmoid(s['x']), s['x']))),
    'logsumexp': lambda s: ops.reduceSum(ops.logsumexp(
        ops.multiply(3.0, s['x']), axis=1)),
    'indexing': lambda s: ops.reduceSum(ops.square(ops.concatenate(
        [ops.getitem(s['x'], (slice(0, 2),)),
         ops.transpose(ops.reshape(s['y'], (4, 2)))], axis=1))),
    'operators': lambda s: ((s['x'] * 2.0 - 1.0) @ s['y']).sum() +
    (-s['x'] / 3.0).mean(),
}


@pytest.mark.parametrize('name', sorted(PROGRAMS))
def test_primitive_gradients(name, rng):
    params = _params(rng, x=(3, 4), y=(4, 2))
    report = checkGrad(PROGRAMS[name], params, rtol=1e-4)
    assert report.passed, report


def test_convolution_gradients(rng):
    params = _params(rng, x=(2, 2, 4, 4), w=(3, 2, 3, 3), s=(3, 2, 1, 1))

    def program(s):
        h = ops.add(ops.conv2d(s['x'], s['w']),
                    ops.conv2d(s['x'], s['s'], padding=0))
        return ops.reduceSum(ops.square(ops.globalAvgPool(
            ops.maxPool2d(ops.swish(h), 2))))
    report = checkGrad(program, params, rtol=1e-4)
    assert report.passed, report


def test_evaluate_matches_tape_value(rng):
    params = _params(rng, x=(3, 4), y=(4, 2))
    program = PROGRAMS['matmul']
    assert np.isclose(evaluate(program, params),
                      valueAndGrad(program, params)[0])


def test_non_finite_value_names_segment():
    layout = ParameterLayout()
    layout.add('bad', (2,))
    params = ParameterVector(layout, [-1.0, 1.0])
    with np.errstate(invalid='ignore'):
        with pytest.raises(NumericalFailure) as info:
            valueAndGrad(lambda s: ops.reduceSum(ops.log(s['bad'])), params)
    assert info.value.segment == 'bad'


def test_non_scalar_program_is_rejected(rng):
    params = _params(rng, x=(3,))
    with pytest.raises(ValueError):
        valueAndGrad(lambda s: ops.multiply(s['x'], 2.0), params)


def test_grad_check_reports_worst_segment(rng):
    params = _params(rng, x=(3, 4), y=(4, 2))
    report = checkGrad(PROGRAMS['matmul'], params, rtol=1e-4,
                       max_per_segment=3)
    frame = report.toFrame()
    assert list(frame.segment) == ['x', 'y']
    assert report.worstSegment in ('x', 'y')
    assert report.failedSegments == []


def test_wrong_adjoint_is_flagged(rng):
    # sin with the adjoint of cos
    wrongSin = ops.defineOp('wrongSin', np.sin,
                            lambda x, out, g: g * -np.sin(x))
    params = _params(rng, good=(3,), bad=(3,))

    def program(s):
        return ops.add(ops.reduceSum(ops.square(s['good'])),
                       ops.reduceSum(wrongSin(s['bad'])))
    report = checkGrad(program, params, rtol=1e-5)
    assert not report.passed
    assert report.failedSegments == ['bad']
    assert report.worstSegment == 'bad'


def test_defined_op_with_correct_adjoint_passes(rng):
    sinOp = ops.defineOp('sin', np.sin, lambda x, out, g: g * np.cos(x))
    params = _params(rng, x=(4,))
    report = checkGrad(lambda s: ops.reduceSum(sinOp(s['x'])), params,
                       rtol=1e-6)
    assert report.passed


def test_gradient_is_linear_in_the_program(rng):
    params = _params(rng, w=(3, 2), b=(2,))
    x = rng.normal(size=(4, 3))

    def first(s):
        return ops.reduceSum(ops.square(ops.add(ops.matmul(x, s['w']),
                                                s['b'])))

    def second(s):
        return ops.reduceSum(ops.exp(s['b']))

    a, c = 1.7, -0.4
    _, g1 = valueAndGrad(first, params)
    _, g2 = valueAndGrad(second, params)
    _, combined = valueAndGrad(
        lambda s: ops.add(ops.multiply(a, first(s)),
                          ops.multiply(c, second(s))), params)
    assert np.allclose(combined.values, a * g1.values + c * g2.values,
                       rtol=1e-12, atol=1e-12)
