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
import pandas as pd
import pytest

from fewshot_metric import splitID
from fewshot_metric.data import (MANIFEST_COLUMNS, LabeledStore, SplitError,
                                 fc100Split, splitManifest, superclassSplit,
                                 writeSplitManifest)


def _labelStore(n_coarse=20):
    fine = np.arange(100)
    fine = fine[fine % 20 < n_coarse]
    return LabeledStore(np.zeros((fine.size, 0)), fine, fine % 20)


def test_fc100_partition_sizes():
    splits = fc100Split(_labelStore())
    assert list(splits) == ['train', 'val', 'test']
    assert [len(s.class_ids) for s in splits.values()] == [60, 20, 20]
    assert splits['train'].coarseClasses() == list(splitID.FC100_TRAIN)
    assert splits['val'].coarseClasses() == list(splitID.FC100_VAL)
    assert splits['test'].coarseClasses() == list(splitID.FC100_TEST)


def test_fc100_splits_are_disjoint():
    splits = fc100Split(_labelStore())
    ids = [set(s.class_ids) for s in splits.values()]
    assert not ids[0] & ids[1] and not ids[0] & ids[2] and not ids[1] & ids[2]
    assert set.union(*ids) == set(range(100))


def test_fc100_needs_all_superclasses():
    with pytest.raises(SplitError):
        fc100Split(_labelStore(n_coarse=19))


def test_partition_assigning_superclass_twice():
    with pytest.raises(SplitError):
        superclassSplit(_labelStore(), {'train': (0, 1), 'val': (1,)})


def test_store_rejects_inconsistent_labels():
    with pytest.raises(ValueError):
        LabeledStore(np.zeros((3, 1)), [0, 0, 1], [0, 1, 1])


def test_manifest(tmp_path):
    splits = fc100Split(_labelStore())
    frame = splitManifest(splits)
    assert list(frame.columns) == MANIFEST_COLUMNS
    assert len(frame) == 100
    assert (frame.fine_label % 20 == frame.coarse_label).all()
    path = tmp_path / 'manifest.csv'
    writeSplitManifest(splits, str(path))
    back = pd.read_csv(path)
    assert back.equals(frame)
    assert back.groupby('split_name').size().to_dict() == \
        {'test': 20, 'train': 60, 'val': 20}
