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
Differentiable primitives.

Every primitive accepts plain arrays and Variables. With plain arrays only
it returns a plain array; otherwise the result is recorded on the tape of
its Variable operands together with one adjoint per operand.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit
from scipy.special import logsumexp as _logsumexp

from .reverseTape import Variable


def value(x):
    if isinstance(x, Variable):
        return x.value
    return np.asarray(x, dtype=np.float64)


def _record(op, out, *links):
    tracked = [(x, adjoint) for x, adjoint in links
               if isinstance(x, Variable)]
    if not tracked:
        return out
    tape = tracked[0][0].tape
    for x, _ in tracked[1:]:
        if x.tape is not tape:
            raise ValueError('Operands of %s belong to different tapes' % op)
    return tape.record(op, out, tracked)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def _axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if np.isscalar(axis):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


def add(a, b):
    av, bv = value(a), value(b)
    return _record('add', av + bv,
                   (a, lambda g: _unbroadcast(g, av.shape)),
                   (b, lambda g: _unbroadcast(g, bv.shape)))


def subtract(a, b):
    av, bv = value(a), value(b)
    return _record('subtract', av - bv,
                   (a, lambda g: _unbroadcast(g, av.shape)),
                   (b, lambda g: _unbroadcast(-g, bv.shape)))


def multiply(a, b):
    av, bv = value(a), value(b)
    return _record('multiply', av * bv,
                   (a, lambda g: _unbroadcast(g * bv, av.shape)),
                   (b, lambda g: _unbroadcast(g * av, bv.shape)))


def divide(a, b):
    av, bv = value(a), value(b)
    return _record('divide', av / bv,
                   (a, lambda g: _unbroadcast(g / bv, av.shape)),
                   (b, lambda g: _unbroadcast(-g * av / (bv * bv),
                                              bv.shape)))


def negative(x):
    return _record('negative', -value(x), (x, lambda g: -g))


def power(x, exponent):
    xv = value(x)
    exponent = float(exponent)
    return _record('power', xv ** exponent,
                   (x, lambda g: g * exponent * xv ** (exponent - 1.0)))


def square(x):
    xv = value(x)
    return _record('square', xv * xv, (x, lambda g: 2.0 * g * xv))


def sqrt(x):
    out = np.sqrt(value(x))
    return _record('sqrt', out, (x, lambda g: 0.5 * g / out))


def exp(x):
    out = np.exp(value(x))
    return _record('exp', out, (x, lambda g: g * out))


def log(x):
    xv = value(x)
    return _record('log', np.log(xv), (x, lambda g: g / xv))


def sigmoid(x):
    out = expit(value(x))
    return _record('sigmoid', out, (x, lambda g: g * out * (1.0 - out)))


def swish(x):
    '''
    swish-1 activation, x * sigmoid(x).
    '''
    xv = value(x)
    s = expit(xv)
    return _record('swish', xv * s,
                   (x, lambda g: g * (s + xv * s * (1.0 - s))))


def matmul(a, b):
    av, bv = value(a), value(b)
    if av.ndim != 2 or bv.ndim != 2:
        raise ValueError('matmul expects matrices, got %s and %s' %
                         (av.shape, bv.shape))
    return _record('matmul', av @ bv,
                   (a, lambda g: g @ bv.T),
                   (b, lambda g: av.T @ g))


def reduceSum(x, axis=None, keepdims=False):
    xv = value(x)
    axes = _axes(axis, xv.ndim)

    def adjoint(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g, xv.shape)
    return _record('sum', np.sum(xv, axis=axes, keepdims=keepdims),
                   (x, adjoint))


def reduceMean(x, axis=None, keepdims=False):
    xv = value(x)
    axes = _axes(axis, xv.ndim)
    count = float(np.prod([xv.shape[a] for a in axes]))
    return divide(reduceSum(x, axes, keepdims), count)


def reshape(x, shape):
    xv = value(x)
    return _record('reshape', xv.reshape(shape),
                   (x, lambda g: g.reshape(xv.shape)))


def transpose(x, axes=None):
    xv = value(x)
    if axes is None:
        axes = tuple(reversed(range(xv.ndim)))
    inverse = tuple(np.argsort(axes))
    return _record('transpose', np.transpose(xv, axes),
                   (x, lambda g: np.transpose(g, inverse)))


def getitem(x, index):
    xv = value(x)

    def adjoint(g):
        out = np.zeros_like(xv)
        np.add.at(out, index, g)
        return out
    return _record('getitem', xv[index], (x, adjoint))


def concatenate(parts, axis=0):
    values = [value(p) for p in parts]
    bounds = np.cumsum([v.shape[axis] for v in values])[:-1]

    def piece(i):
        def adjoint(g):
            return np.split(g, bounds, axis=axis)[i]
        return adjoint
    return _record('concatenate', np.concatenate(values, axis=axis),
                   *[(p, piece(i)) for i, p in enumerate(parts)])


def logsumexp(x, axis=None, keepdims=False):
    '''
    Stable log-sum-exp (max subtraction inside scipy).
    '''
    xv = value(x)
    axes = _axes(axis, xv.ndim)
    kept = _logsumexp(xv, axis=axes, keepdims=True)
    weights = np.exp(xv - kept)

    def adjoint(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return g * weights
    out = kept if keepdims else np.squeeze(kept, axis=axes)
    return _record('logsumexp', out, (x, adjoint))


def conv2d(x, w, padding=1):
    '''
    Stride-1 cross-correlation of NCHW input with OIkk kernels and zero
    padding.
    '''
    xv, wv = value(x), value(w)
    if xv.ndim != 4 or wv.ndim != 4 or xv.shape[1] != wv.shape[1]:
        raise ValueError('conv2d shapes %s and %s do not match' %
                         (xv.shape, wv.shape))
    kh, kw = wv.shape[2], wv.shape[3]
    p = int(padding)
    xp = np.pad(xv, ((0, 0), (0, 0), (p, p), (p, p)))
    ho = xp.shape[2] - kh + 1
    wo = xp.shape[3] - kw + 1
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    out = np.einsum('nchwij,ocij->nohw', windows, wv, optimize=True)

    def adjointX(g):
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + ho, j:j + wo] += np.einsum(
                    'nohw,oc->nchw', g, wv[:, :, i, j], optimize=True)
        return gxp[:, :, p:p + xv.shape[2], p:p + xv.shape[3]]

    def adjointW(g):
        return np.einsum('nchwij,nohw->ocij', windows, g, optimize=True)
    return _record('conv2d', out, (x, adjointX), (w, adjointW))


def maxPool2d(x, size=2):
    xv = value(x)
    n, c, h, w = xv.shape
    if h % size or w % size:
        raise ValueError('maxPool2d needs spatial size divisible by %d, '
                         'got %dx%d' % (size, h, w))
    blocks = xv.reshape(n, c, h // size, size, w // size, size)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(
        n, c, h // size, w // size, size * size)
    # first maximum wins on ties
    winner = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, winner[..., None], axis=-1)[..., 0]

    def adjoint(g):
        spread = np.zeros_like(blocks)
        np.put_along_axis(spread, winner[..., None], g[..., None], axis=-1)
        spread = spread.reshape(n, c, h // size, w // size, size, size)
        return spread.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
    return _record('maxPool2d', out, (x, adjoint))


def globalAvgPool(x):
    return reduceMean(x, axis=(2, 3))


def defineOp(name, forward, adjoint):
    '''
    Build a unary primitive from a forward function and a hand-written
    adjoint adjoint(x, out, g).
    '''
    def primitive(x):
        xv = value(x)
        out = np.asarray(forward(xv), dtype=np.float64)
        return _record(name, out, (x, lambda g: adjoint(xv, out, g)))
    primitive.__name__ = name
    return primitive


def _reflected(fn):
    return lambda self, other: fn(other, self)


Variable.__add__ = add
Variable.__radd__ = _reflected(add)
Variable.__sub__ = subtract
Variable.__rsub__ = _reflected(subtract)
Variable.__mul__ = multiply
Variable.__rmul__ = _reflected(multiply)
Variable.__truediv__ = divide
Variable.__rtruediv__ = _reflected(divide)
Variable.__matmul__ = matmul
Variable.__rmatmul__ = _reflected(matmul)
Variable.__neg__ = negative
Variable.__pow__ = power
Variable.__getitem__ = getitem
Variable.T = property(lambda self: transpose(self))
Variable.sum = reduceSum
Variable.mean = reduceMean
Variable.reshape = reshape
