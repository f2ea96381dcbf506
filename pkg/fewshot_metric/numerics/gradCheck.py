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
import pandas as pd

from .paramVector import GradientVector
from .reverseTape import NumericalFailure, evaluate, valueAndGrad

DEFAULT_STEP = 1e-5
# Gradients smaller than this are compared absolutely
DEFAULT_ABS_FLOOR = 1e-5


def _coordinates(layout, max_per_segment, rng):
    if max_per_segment is None:
        return np.arange(layout.size)
    picked = []
    for name in layout.names():
        sl = layout.slice(name)
        idx = np.arange(sl.start, sl.stop)
        if idx.size > max_per_segment:
            idx = np.sort(rng.choice(idx, max_per_segment, replace=False))
        picked.append(idx)
    return np.concatenate(picked)


def finiteDiffGrad(program, params, step=DEFAULT_STEP, coordinates=None):
    '''
    Central-difference gradient of a scalar program.

    (program(p + h e_i) - program(p - h e_i)) / 2h for every coordinate i,
    or only for the given coordinates (the others are left at zero).
    '''
    if not step > 0:
        raise ValueError('Finite difference step must be positive, got %r'
                         % step)
    layout = params.layout
    if coordinates is None:
        coordinates = np.arange(layout.size)
    grad = np.zeros(layout.size, dtype=np.float64)
    shifted = params.copy()
    for i in coordinates:
        original = shifted.values[i]
        shifted.values[i] = original + step
        upper = evaluate(program, shifted)
        shifted.values[i] = original - step
        lower = evaluate(program, shifted)
        shifted.values[i] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            name = layout.segmentOf(int(i))
            raise NumericalFailure('Non-finite evaluation when perturbing '
                                   'segment %s' % name, segment=name)
        grad[i] = (upper - lower) / (2.0 * step)
    return GradientVector(layout, grad)


class GradCheckReport(object):

    """
    Comparison of the tape gradient against central finite differences.
    """

    def __init__(self, rtol, segment_errors, worst_coordinate, worst_segment,
                 max_rel_error, analytic, numeric):
        self.rtol = rtol
        self.segmentErrors = segment_errors
        self.worstCoordinate = worst_coordinate
        self.worstSegment = worst_segment
        self.maxRelError = max_rel_error
        self.analytic = analytic
        self.numeric = numeric

    @property
    def passed(self):
        return self.maxRelError <= self.rtol

    @property
    def failedSegments(self):
        return [name for name, err in self.segmentErrors.items()
                if err > self.rtol]

    def toFrame(self):
        return pd.DataFrame({'segment': list(self.segmentErrors.keys()),
                             'max_rel_error':
                             list(self.segmentErrors.values())})

    def __repr__(self):
        return ('GradCheckReport(max_rel_error=%.3e at %d [%s], rtol=%.1e)' %
                (self.maxRelError, self.worstCoordinate, self.worstSegment,
                 self.rtol))


def checkGrad(program, params, rtol, step=DEFAULT_STEP,
              abs_floor=DEFAULT_ABS_FLOOR, max_per_segment=None, rng=None):
    """
    Compare valueAndGrad against finiteDiffGrad.

    Relative error per coordinate is |a - n| / max(|a|, |n|, abs_floor).

    :param callable program: Scalar program
    :param ParameterVector params: Point of evaluation
    :param float rtol: Tolerance used for the pass/fail flags
    :param int max_per_segment: Check at most this many coordinates of each
           segment (sampled with rng); all coordinates when None
    :return: Report with per-segment maximum relative errors
    :rtype: GradCheckReport
    """
    if not rtol > 0:
        raise ValueError('rtol must be positive, got %r' % rtol)
    rng = rng if rng is not None else np.random.default_rng(0)
    layout = params.layout
    coords = _coordinates(layout, max_per_segment, rng)
    _, analytic = valueAndGrad(program, params)
    numeric = finiteDiffGrad(program, params, step, coordinates=coords)

    a = analytic.values[coords]
    n = numeric.values[coords]
    scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), abs_floor)
    errors = np.abs(a - n) / scale

    segment_errors = OrderedDict()
    for name in layout.names():
        sl = layout.slice(name)
        mask = (coords >= sl.start) & (coords < sl.stop)
        segment_errors[name] = float(errors[mask].max()) if mask.any() \
            else 0.0
    worst = int(np.argmax(errors)) if errors.size else 0
    worst_coordinate = int(coords[worst]) if errors.size else 0
    return GradCheckReport(rtol, segment_errors, worst_coordinate,
                           layout.segmentOf(worst_coordinate),
                           float(errors.max()) if errors.size else 0.0,
                           analytic, numeric)
