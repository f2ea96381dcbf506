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


import os

import numpy as np
import pandas as pd
import pytest

from fewshot_metric.data import synthDataset
from fewshot_metric.fewShotRunner import EXIT_OK, run
from fewshot_metric.initialConfiguration import loadConfig

SCALING = os.path.join(os.path.dirname(__file__), 'configs',
                       'alpha_scaling.cfg')


@pytest.fixture(scope='module')
def sweepTable(tmp_path_factory):
    out = tmp_path_factory.mktemp('scaling')
    assert run(['sweep-alpha', '--config', SCALING, '--out',
                str(out)]) == EXIT_OK
    return pd.read_csv(out / 'alpha_sweep.csv').set_index('alpha')


def test_scaling_config_resolves():
    config = loadConfig(SCALING)
    assert config.head.kind == 'cosine-distance'
    assert config.train.alpha_grid == (0.01, 0.1, 1.0, 10.0, 100.0)
    store, splits = synthDataset(config.data.synthConfig())
    assert store.inputShape == (16,)
    assert [len(s.class_ids) for s in splits.values()] == [20, 10, 10]
    # nuisance coordinates carry no class information
    means = np.array([store.inputs[store.classIndex(c)][:, 4:].mean(axis=0)
                      for c in store.fineClasses()])
    assert np.abs(means).max() < 1.5


@pytest.mark.slow
def test_scaled_cosine_beats_unit_temperature(sweepTable):
    acc = sweepTable.val_acc
    assert acc.max() - acc[1.0] >= 0.05


@pytest.mark.slow
def test_accuracy_peaks_inside_the_grid(sweepTable):
    acc = sweepTable.val_acc
    best = acc.idxmax()
    assert best not in (acc.index.min(), acc.index.max())
    assert acc[best] - acc[acc.index.min()] >= 0.02
    assert acc[best] - acc[acc.index.max()] >= 0.02
