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

from fewshot_metric.data import RECORD_BYTES, SynthConfig, synthDataset
from fewshot_metric.embedding import ExtractorConfig
from fewshot_metric.episodes import Episode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def synthConfig():
    # 3 superclasses of 4 classes: one superclass per split
    return SynthConfig(n_classes=12, n_superclasses=3, input_shape=(4,),
                       superclass_scale=3.0, mean_scale=2.0,
                       within_scale=0.2, samples_per_class=20,
                       split_superclasses=(1, 1, 1), seed=3)


@pytest.fixture
def synthSplits(synthConfig):
    return synthDataset(synthConfig)


@pytest.fixture
def linearConfig():
    return ExtractorConfig(kind='linear', input_shape=(4,), embedding_dim=3,
                           weight_decay=0.0)


@pytest.fixture
def toyEpisode():
    """
    2-way 1-shot episode with two queries per class in 4 dimensions.
    """
    return Episode(
        sample_inputs=np.array([[1.0, 0.2, -0.3, 0.5],
                                [-0.8, 0.4, 0.9, -0.1]]),
        sample_labels=np.array([0, 1]),
        query_inputs=np.array([[0.9, 0.1, -0.2, 0.4],
                               [1.1, 0.3, -0.5, 0.7],
                               [-0.7, 0.5, 1.0, 0.0],
                               [-0.9, 0.2, 0.6, -0.3]]),
        query_labels=np.array([0, 0, 1, 1]),
        class_ids=np.array([10, 20]), ways=2, shots=1)


@pytest.fixture
def imageEpisode():
    """
    Factory of random 3-channel image episodes.
    """
    return _imageEpisode


def _imageEpisode(rng, ways=2, shots=1, queries_per_class=1, size=8):
    sample_labels = np.repeat(np.arange(ways), shots)
    query_labels = np.repeat(np.arange(ways), queries_per_class)
    return Episode(
        sample_inputs=rng.uniform(-1, 1, (sample_labels.size, 3, size, size)),
        sample_labels=sample_labels,
        query_inputs=rng.uniform(-1, 1, (query_labels.size, 3, size, size)),
        query_labels=query_labels,
        class_ids=np.arange(ways), ways=ways, shots=shots)


def _cifarRecords(fine, rng):
    fine = np.asarray(fine, dtype=np.uint8)
    buf = np.empty((fine.size, RECORD_BYTES), dtype=np.uint8)
    buf[:, 0] = fine % 20
    buf[:, 1] = fine
    buf[:, 2:] = rng.integers(0, 256, (fine.size, RECORD_BYTES - 2))
    return buf.tobytes()


@pytest.fixture
def cifarRecords():
    """
    Encoder of CIFAR-100 binary records with coarse label fine % 20 and
    random pixels.
    """
    return _cifarRecords


@pytest.fixture
def cifarDir(tmp_path):
    rng = np.random.default_rng(0)
    (tmp_path / 'train.bin').write_bytes(
        _cifarRecords(np.repeat(np.arange(100), 2), rng))
    (tmp_path / 'test.bin').write_bytes(_cifarRecords(np.arange(100), rng))
    return tmp_path
