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

from fewshot_metric.data import (RECORD_BYTES, CifarFormatError,
                                 decodeCifarRecords, downsample,
                                 loadCifar100, loadCifar100Labels)
from fewshot_metric.splitID import FC100_TRAIN


def test_decode_records(cifarRecords):
    raw = cifarRecords([7, 45], np.random.default_rng(1))
    coarse, fine, images = decodeCifarRecords(raw)
    assert coarse.tolist() == [7, 5]
    assert fine.tolist() == [7, 45]
    assert images.shape == (2, 3, 32, 32)
    assert images.min() >= 0 and images.max() <= 1
    # red plane first, row major
    assert images[1, 0, 0, 1] == raw[RECORD_BYTES + 3] / 255.0
    assert images[0, 2, 31, 31] == raw[RECORD_BYTES - 1] / 255.0


def test_truncated_record(cifarRecords):
    raw = cifarRecords([1, 2], np.random.default_rng(1)) + b'\x00' * 10
    with pytest.raises(CifarFormatError) as info:
        decodeCifarRecords(raw)
    assert info.value.offset == 2 * RECORD_BYTES


def test_label_out_of_range(cifarRecords):
    raw = bytearray(cifarRecords([1, 2, 3], np.random.default_rng(1)))
    raw[RECORD_BYTES] = 20
    with pytest.raises(CifarFormatError) as info:
        decodeCifarRecords(bytes(raw))
    assert info.value.offset == RECORD_BYTES

    raw = bytearray(cifarRecords([1, 2, 3], np.random.default_rng(1)))
    raw[2 * RECORD_BYTES + 1] = 100
    with pytest.raises(CifarFormatError) as info:
        decodeCifarRecords(bytes(raw))
    assert info.value.offset == 2 * RECORD_BYTES + 1


def test_downsample_averages_blocks():
    images = np.arange(16.0).reshape(1, 1, 4, 4)
    out = downsample(images, 2)
    assert out.shape == (1, 1, 2, 2)
    assert out[0, 0].tolist() == [[2.5, 4.5], [10.5, 12.5]]
    with pytest.raises(ValueError):
        downsample(images, 3)


def test_load_normalizes_with_train_statistics(cifarDir):
    store = loadCifar100(str(cifarDir), size=8)
    assert store.inputs.shape == (300, 3, 8, 8)
    assert len(store.fineClasses()) == 100
    train = store.inputs[:200][np.isin(store.coarse[:200], FC100_TRAIN)]
    assert np.allclose(train.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)
    assert np.allclose(train.std(axis=(0, 2, 3)), 1.0)
    mean, std = store.norm_stats
    assert len(mean) == len(std) == 3


def test_statistics_ignore_held_out_superclasses(cifarDir):
    before = loadCifar100(str(cifarDir)).norm_stats
    for name in ('train.bin', 'test.bin'):
        raw = bytearray((cifarDir / name).read_bytes())
        for start in range(0, len(raw), RECORD_BYTES):
            if raw[start] not in FC100_TRAIN:
                raw[start + 2:start + RECORD_BYTES] = \
                    b'\xff' * (RECORD_BYTES - 2)
        (cifarDir / name).write_bytes(bytes(raw))
    after = loadCifar100(str(cifarDir)).norm_stats
    assert np.array_equal(before[0], after[0])
    assert np.array_equal(before[1], after[1])


def test_unequal_class_counts_are_rejected(cifarDir, cifarRecords):
    raw = (cifarDir / 'test.bin').read_bytes()
    (cifarDir / 'test.bin').write_bytes(
        raw + cifarRecords([45], np.random.default_rng(2)))
    with pytest.raises(ValueError, match='Class 45'):
        loadCifar100(str(cifarDir), normalize=False)


def test_load_from_archive_subdirectory(cifarDir, tmp_path_factory):
    root = tmp_path_factory.mktemp('archive')
    (root / 'cifar-100-binary').mkdir()
    for name in ('train.bin', 'test.bin'):
        (root / 'cifar-100-binary' / name).write_bytes(
            (cifarDir / name).read_bytes())
    store = loadCifar100(str(root), normalize=False)
    assert store.inputs.shape == (300, 3, 32, 32)
    assert store.norm_stats is None


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        loadCifar100(str(tmp_path))


def test_corrupt_file_names_the_file(cifarDir):
    raw = (cifarDir / 'test.bin').read_bytes()
    (cifarDir / 'test.bin').write_bytes(raw[:-5])
    with pytest.raises(CifarFormatError, match='test.bin'):
        loadCifar100Labels(str(cifarDir))


def test_labels_only(cifarDir):
    store = loadCifar100Labels(str(cifarDir))
    assert store.inputs.shape == (300, 0)
    assert store.coarseClasses() == list(range(20))
    assert int(store.fineToCoarse[45]) == 5
