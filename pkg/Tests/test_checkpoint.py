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


import zlib

import numpy as np
import pytest

from fewshot_metric import FewShotModel
from fewshot_metric.data import (FORMAT_VERSION, MAGIC, CheckpointError,
                                 ChecksumError, ConfigMismatchError,
                                 VersionError, decodeCheckpoint,
                                 encodeCheckpoint, loadCheckpoint,
                                 saveCheckpoint)
from fewshot_metric.embedding import ExtractorConfig, TenConfig
from fewshot_metric.episodes import runEpisode
from fewshot_metric.metric import ScaledMetricHead
from fewshot_metric.training import TrainConfig


def _model(**kwargs):
    options = dict(kind='mini-resnet', input_shape=(3, 8, 8), blocks=1,
                   depth=2, base_filters=2)
    options.update(kwargs)
    config = ExtractorConfig(**options)
    return FewShotModel(config, TenConfig(enabled=True),
                        ScaledMetricHead('squared-euclidean', 3.0,
                                         trainable=True),
                        aux_classes=5, rng=8)


def _withCrc(body):
    return body + np.array([zlib.crc32(body)], dtype='<u4').tobytes()


def test_round_trip(tmp_path, rng, imageEpisode):
    model = _model()
    model.params.values[:] = rng.normal(size=model.layout.size)
    path = str(tmp_path / 'model.fsm')
    saveCheckpoint(model, path, TrainConfig(shots=1), ([0.5], [0.25]))
    loaded = loadCheckpoint(path, expected=model)
    assert loaded.layout == model.layout
    assert np.array_equal(loaded.params.values, model.params.values)
    assert loaded.metadata['norm_stats'] == [[0.5], [0.25]]
    assert loaded.metadata['train']['tasks_per_batch'] == 5
    episode = imageEpisode(rng, ways=2, shots=2, queries_per_class=2)
    assert np.array_equal(runEpisode(model, episode).probabilities,
                          runEpisode(loaded, episode).probabilities)


def test_running_statistics_survive(tmp_path, rng, imageEpisode):
    model = _model(normalization='frozen')
    episode = imageEpisode(rng, ways=2, shots=1, queries_per_class=1)
    runEpisode(model, episode, training=True)
    path = str(tmp_path / 'model.fsm')
    saveCheckpoint(model, path)
    loaded = loadCheckpoint(path)
    for name, (mean, var) in model.extractor.runningStats.items():
        assert np.array_equal(loaded.extractor.runningStats[name][0], mean)
        assert np.array_equal(loaded.extractor.runningStats[name][1], var)


def test_layout_of_bytes():
    raw = encodeCheckpoint(_model())
    assert raw[:4] == MAGIC
    assert raw[4] == FORMAT_VERSION
    assert zlib.crc32(raw[:-4]) == int(np.frombuffer(raw[-4:], '<u4')[0])


def test_corrupted_byte_fails_checksum():
    raw = bytearray(encodeCheckpoint(_model()))
    raw[len(raw) // 2] ^= 0xFF
    with pytest.raises(ChecksumError):
        decodeCheckpoint(bytes(raw))


def test_checksum_is_checked_before_version():
    raw = bytearray(encodeCheckpoint(_model()))
    raw[4] = FORMAT_VERSION + 1
    with pytest.raises(ChecksumError):
        decodeCheckpoint(bytes(raw))
    with pytest.raises(VersionError):
        decodeCheckpoint(_withCrc(bytes(raw[:-4])))


def test_not_a_checkpoint():
    with pytest.raises(CheckpointError):
        decodeCheckpoint(b'PK\x03\x04' + b'\x00' * 20)


def test_configuration_mismatch(tmp_path):
    path = str(tmp_path / 'model.fsm')
    saveCheckpoint(_model(), path)
    with pytest.raises(ConfigMismatchError):
        loadCheckpoint(path, expected=_model(base_filters=4))
    with pytest.raises(ConfigMismatchError):
        loadCheckpoint(path, expected={'aux_classes': 3})
    assert loadCheckpoint(path, expected={'aux_classes': 5}).aux_classes == 5
