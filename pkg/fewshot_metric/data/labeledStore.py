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


from dataclasses import dataclass

import numpy as np
import pandas as pd


class LabeledStore(object):

    """
    Immutable collection of (input, fine label, coarse label) records.
    """

    def __init__(self, inputs, fine, coarse, norm_stats=None, name=''):
        """
        :param inputs: (n, *input_shape) float inputs
        :param fine: n fine labels
        :param coarse: n coarse labels
        :param norm_stats: (mean, std) per channel applied to inputs, if any
        :param str name: Description used in messages
        """
        self.inputs = np.asarray(inputs, dtype=np.float64)
        self.fine = np.asarray(fine, dtype=int)
        self.coarse = np.asarray(coarse, dtype=int)
        if not len(self.inputs) == len(self.fine) == len(self.coarse):
            raise ValueError('inputs, fine and coarse labels differ in '
                             'length')
        self.norm_stats = norm_stats
        self.name = name

        pairs = pd.DataFrame({'fine': self.fine, 'coarse': self.coarse})
        per_fine = pairs.groupby('fine').coarse.nunique()
        if (per_fine > 1).any():
            raise ValueError('Fine label %d maps to several coarse labels' %
                             int(per_fine[per_fine > 1].index[0]))
        self.fineToCoarse = pairs.drop_duplicates('fine').set_index(
            'fine').coarse.sort_index()
        self._index = dict((int(c), np.flatnonzero(self.fine == c))
                           for c in self.fineToCoarse.index)

    def classIndex(self, fine_label):
        """
        :return: Record ids of one fine class
        """
        try:
            return self._index[int(fine_label)]
        except KeyError:
            raise KeyError('No records of class %d in %s' %
                           (fine_label, self.name or 'store'))

    def fineClasses(self):
        return [int(c) for c in self.fineToCoarse.index]

    def coarseClasses(self):
        return sorted(int(c) for c in self.fineToCoarse.unique())

    def classCounts(self):
        return pd.Series(self.fine).value_counts().sort_index()

    def checkBalanced(self):
        """
        :return: self
        :raises ValueError: when fine classes hold unequal record counts
        """
        counts = self.classCounts()
        if counts.nunique() > 1:
            odd = counts[counts != counts.mode().iloc[0]]
            raise ValueError('Class %d of %s has %d records, expected %d' %
                             (int(odd.index[0]), self.name or 'store',
                              int(odd.iloc[0]), int(counts.mode().iloc[0])))
        return self

    @property
    def inputShape(self):
        return self.inputs.shape[1:]

    def __len__(self):
        return len(self.fine)

    def __repr__(self):
        return 'LabeledStore(%s%d records, %d classes)' % (
            self.name + ', ' if self.name else '', len(self),
            len(self._index))


@dataclass
class DatasetSplit:
    name: str
    class_ids: tuple
    store: LabeledStore

    def __post_init__(self):
        self.class_ids = tuple(sorted(int(c) for c in self.class_ids))

    @property
    def size(self):
        return sum(len(self.store.classIndex(c)) for c in self.class_ids)

    def coarseClasses(self):
        return sorted(set(int(self.store.fineToCoarse[c])
                          for c in self.class_ids))
