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

import pandas as pd

from .. import splitID
from ..fileTools import writeFrame
from .labeledStore import DatasetSplit

MANIFEST_COLUMNS = ['split_name', 'coarse_label', 'fine_label']

FC100_PARTITION = OrderedDict([(splitID.SPLIT_TRAIN, splitID.FC100_TRAIN),
                               (splitID.SPLIT_VAL, splitID.FC100_VAL),
                               (splitID.SPLIT_TEST, splitID.FC100_TEST)])


class SplitError(ValueError):
    pass


def superclassSplit(store, partition):
    """
    Split the fine classes of a store by the superclass they belong to.

    :param LabeledStore store: Store
    :param partition: Mapping split name -> superclass labels
    :rtype: OrderedDict of DatasetSplit
    """
    seen = set()
    for name, coarse in partition.items():
        overlap = seen.intersection(coarse)
        if overlap:
            raise SplitError('Superclasses %s assigned twice' %
                             sorted(overlap))
        seen.update(coarse)
    mapping = store.fineToCoarse
    splits = OrderedDict()
    for name, coarse in partition.items():
        members = mapping.index[mapping.isin(list(coarse))]
        splits[name] = DatasetSplit(name, tuple(members), store)
    return splits


def fc100Split(store):
    """
    FC100 train/val/test splits of a CIFAR-100 store, by superclass.

    :raises SplitError: when the coarse labels do not cover 0..19
    """
    present = set(store.coarseClasses())
    expected = set(range(splitID.CIFAR_COARSE_CLASSES))
    if present != expected:
        raise SplitError('Store coarse labels %s do not cover 0..%d' %
                         (sorted(present), splitID.CIFAR_COARSE_CLASSES - 1))
    return superclassSplit(store, FC100_PARTITION)


def splitManifest(splits):
    """
    One row per fine class: split_name, coarse_label, fine_label.
    """
    rows = []
    for name, split in splits.items():
        for c in split.class_ids:
            rows.append((name, int(split.store.fineToCoarse[c]), c))
    return pd.DataFrame(rows, columns=MANIFEST_COLUMNS)


def writeSplitManifest(splits, path):
    df = splitManifest(splits)
    writeFrame(df, path)
    return df
