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


class ParameterLayout(object):

    """
    Ordered table of named segments inside one flat parameter vector.

    Segments are appended one after another, so their ranges are disjoint
    and together cover the whole vector.
    """

    def __init__(self):
        self._segments = OrderedDict()
        self.size = 0

    def add(self, name, shape):
        """
        Append a segment.

        :param str name: Unique segment name, e.g. 'extractor/block0/conv1/W'
        :param tuple shape: Shape of the segment, () for a scalar
        """
        if name in self._segments:
            raise ValueError('Duplicate parameter segment %s' % name)
        shape = tuple(int(s) for s in shape)
        length = int(np.prod(shape)) if shape else 1
        if length <= 0:
            raise ValueError('Empty parameter segment %s' % name)
        self._segments[name] = (self.size, shape)
        self.size += length

    def names(self):
        return list(self._segments.keys())

    def shape(self, name):
        return self._segments[name][1]

    def offset(self, name):
        return self._segments[name][0]

    def length(self, name):
        shape = self._segments[name][1]
        return int(np.prod(shape)) if shape else 1

    def slice(self, name):
        offset = self.offset(name)
        return slice(offset, offset + self.length(name))

    def segmentOf(self, index):
        """
        :return: Name of the segment holding flat coordinate *index*
        :rtype: str
        """
        for name, (offset, _) in self._segments.items():
            if offset <= index < offset + self.length(name):
                return name
        raise IndexError('Coordinate %d outside layout of size %d' %
                         (index, self.size))

    def toTable(self):
        return [[name, offset, list(shape)]
                for name, (offset, shape) in self._segments.items()]

    @classmethod
    def fromTable(cls, table):
        layout = cls()
        for name, offset, shape in table:
            if offset != layout.size:
                raise ValueError('Segment table is not contiguous at %s' %
                                 name)
            layout.add(name, shape)
        return layout

    def __contains__(self, name):
        return name in self._segments

    def __len__(self):
        return len(self._segments)

    def __eq__(self, other):
        if not isinstance(other, ParameterLayout):
            return NotImplemented
        return (self.size == other.size and
                list(self._segments.items()) ==
                list(other._segments.items()))

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return 'ParameterLayout(%d segments, size %d)' % (len(self),
                                                           self.size)


class ParameterVector(object):

    """
    Flat float64 view of all trainable parameters with a named layout.
    """

    def __init__(self, layout, values=None):
        """
        :param ParameterLayout layout: Segment table
        :param values: Initial values (copied); zeros when omitted
        """
        self.layout = layout
        if values is None:
            self.values = np.zeros(layout.size, dtype=np.float64)
        else:
            self.values = np.array(values, dtype=np.float64).reshape(-1)
        if self.values.size != layout.size:
            raise ValueError('Expected %d values for layout, got %d' %
                             (layout.size, self.values.size))
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ValueError('Non-finite value in segment %s' %
                             layout.segmentOf(bad))

    def segment(self, name):
        """
        :return: Writable view of one segment in its own shape
        :rtype: numpy.ndarray
        """
        return self.values[self.layout.slice(name)].reshape(
            self.layout.shape(name))

    def segments(self):
        """
        :return: Mapping segment name -> writable view
        :rtype: OrderedDict
        """
        return OrderedDict((name, self.segment(name))
                           for name in self.layout.names())

    def __getitem__(self, name):
        return self.segment(name)

    def __setitem__(self, name, value):
        self.values[self.layout.slice(name)] = np.asarray(
            value, dtype=np.float64).reshape(-1)

    def __len__(self):
        return self.layout.size

    def copy(self):
        return self.__class__(self.layout, self.values)

    def __repr__(self):
        return '%s(size=%d)' % (self.__class__.__name__, self.layout.size)


class GradientVector(ParameterVector):

    """
    Gradient of a scalar program, laid out like the parameters it
    differentiates.
    """
