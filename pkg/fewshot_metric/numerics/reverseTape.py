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
Reverse accumulation over an operation tape.

A scalar program is any callable taking a mapping segment name -> array
and returning one real value, written with the primitives of tapeOps (or
the arithmetic operators they install on Variable). Called with plain
arrays it evaluates with numpy only; called with tape variables it records
every primitive so the adjoints can be accumulated in reverse order.
"""

import logging

import numpy as np

from .paramVector import GradientVector

logger = logging.getLogger('fewShot.numerics')


class NumericalFailure(ArithmeticError):

    def __init__(self, message, segment=None):
        super(NumericalFailure, self).__init__(message)
        self.segment = segment


class Variable(object):

    """
    Value recorded on a tape together with the adjoints linking it to the
    variables it was computed from.
    """

    __slots__ = ('tape', 'value', 'links', 'op', 'index', 'segments')
    # numpy must defer binary operators to Variable
    __array_ufunc__ = None

    def __init__(self, tape, value, links, op, index, segments):
        self.tape = tape
        self.value = value
        self.links = links
        self.op = op
        self.index = index
        self.segments = segments

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    @property
    def size(self):
        return self.value.size

    def __len__(self):
        return len(self.value)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return 'Variable(%s, shape=%s)' % (self.op, self.value.shape)


class Tape(object):

    """
    Records the primitives of one evaluation in creation order.

    A tape belongs to a single evaluation; concurrent evaluations each use
    their own tape, so no accumulation state is shared between them.
    """

    def __init__(self):
        self.nodes = []

    def leaf(self, value, name):
        value = np.array(value, dtype=np.float64)
        node = Variable(self, value, (), 'leaf', len(self.nodes),
                        frozenset([name]))
        self.nodes.append(node)
        return node

    def record(self, op, value, links):
        value = np.asarray(value, dtype=np.float64)
        segments = frozenset().union(*[x.segments for x, _ in links])
        if not np.all(np.isfinite(value)):
            names = ','.join(sorted(segments))
            raise NumericalFailure('Non-finite value produced by %s '
                                   '(depends on %s)' % (op, names),
                                   segment=names)
        node = Variable(self, value, tuple(links), op, len(self.nodes),
                        segments)
        self.nodes.append(node)
        return node

    def backward(self, output):
        """
        Accumulate adjoints of *output* with respect to every node.

        :return: Adjoint of each node indexed like self.nodes (None when the
                 node does not influence the output)
        :rtype: list
        """
        adjoints = [None] * len(self.nodes)
        adjoints[output.index] = np.ones_like(output.value)
        for node in reversed(self.nodes[:output.index + 1]):
            g = adjoints[node.index]
            if g is None:
                continue
            for parent, adjoint in node.links:
                contribution = np.asarray(adjoint(g), dtype=np.float64)
                if adjoints[parent.index] is None:
                    adjoints[parent.index] = contribution
                else:
                    adjoints[parent.index] = (adjoints[parent.index] +
                                              contribution)
        return adjoints


def evaluate(program, params):
    """
    Evaluate a scalar program with plain arrays (no tape).

    :param callable program: Scalar program
    :param ParameterVector params: Parameters
    :return: Program value
    :rtype: float
    """
    segments = dict((name, np.array(view))
                    for name, view in params.segments().items())
    result = np.asarray(program(segments), dtype=np.float64)
    if result.size != 1:
        raise ValueError('Scalar program returned shape %s' %
                         (result.shape,))
    return float(result.reshape(()))


def valueAndGrad(program, params):
    """
    Value of a scalar program and its gradient with respect to every
    parameter segment.

    :param callable program: Scalar program
    :param ParameterVector params: Point of evaluation
    :return: (value, gradient)
    :rtype: tuple(float, GradientVector)
    """
    layout = params.layout
    tape = Tape()
    leaves = dict((name, tape.leaf(params.segment(name), name))
                  for name in layout.names())
    out = program(leaves)

    flat = np.zeros(layout.size, dtype=np.float64)
    if not isinstance(out, Variable):
        # Program does not depend on the parameters
        value = np.asarray(out, dtype=np.float64)
        if value.size != 1:
            raise ValueError('Scalar program returned shape %s' %
                             (value.shape,))
        return float(value.reshape(())), GradientVector(layout, flat)

    if out.size != 1:
        raise ValueError('Scalar program returned shape %s' % (out.shape,))
    adjoints = tape.backward(out)
    for name, node in leaves.items():
        g = adjoints[node.index]
        if g is None:
            continue
        if not np.all(np.isfinite(g)):
            raise NumericalFailure('Non-finite gradient in segment %s' %
                                   name, segment=name)
        flat[layout.slice(name)] = g.reshape(-1)
    return float(out.value.reshape(())), GradientVector(layout, flat)
