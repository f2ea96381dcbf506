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

from fewshot_metric.embedding import (ExtractorConfig, FilmParams,
                                      ShapeError, TaskEmbeddingNetwork,
                                      TenConfig, buildExtractor, embed,
                                      filmApply, tenMagnitudeReport,
                                      tenPredict)
from fewshot_metric.numerics import (ParameterLayout, ParameterVector,
                                     checkGrad)
from fewshot_metric.numerics import tapeOps as ops


def _resnetConfig(**kwargs):
    options = dict(kind='mini-resnet', input_shape=(3, 8, 8), blocks=2,
                   depth=2, base_filters=2, weight_decay=0.0)
    options.update(kwargs)
    return ExtractorConfig(**options)


def test_same_seed_same_initialization():
    config = _resnetConfig()
    _, a = buildExtractor(config, 11)
    _, b = buildExtractor(config, 11)
    _, c = buildExtractor(config, 12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_embedding_shapes(rng):
    linear, params = buildExtractor(ExtractorConfig(input_shape=(4,),
                                                    embedding_dim=6), rng)
    assert embed(linear, params, rng.normal(size=(5, 4))).shape == (5, 6)

    mlp, params = buildExtractor(ExtractorConfig(
        kind='mlp', input_shape=(4,), hidden_widths=(8, 5),
        embedding_dim=3), rng)
    assert embed(mlp, params, rng.normal(size=(2, 4))).shape == (2, 3)
    assert mlp.conditionedLayers() == [('mlp/fc0', 8), ('mlp/fc1', 5)]

    resnet, params = buildExtractor(_resnetConfig(), rng)
    z = embed(resnet, params, rng.normal(size=(3, 3, 8, 8)))
    assert z.shape == (3, resnet.outputDim) == (3, 4)
    assert np.all(np.isfinite(z))


def test_wrong_input_shape(rng):
    extractor, params = buildExtractor(_resnetConfig(), rng)
    with pytest.raises(ShapeError):
        embed(extractor, params, np.zeros((2, 3, 6, 6)))
    with pytest.raises(ShapeError):
        buildExtractor(_resnetConfig(input_shape=(3, 6, 6)), rng)


def test_conditioning_flags(rng):
    config = _resnetConfig(conditioned=(True, False, False, True))
    extractor, _ = buildExtractor(config, rng)
    assert [name for name, _ in extractor.conditionedLayers()] == \
        ['resnet/block0/conv0', 'resnet/block1/conv1']
    with pytest.raises(ValueError):
        buildExtractor(_resnetConfig(conditioned=(True,)), rng)


def test_identity_film_is_a_no_op(rng):
    extractor, params = buildExtractor(_resnetConfig(), rng)
    x = rng.normal(size=(2, 3, 8, 8))
    film = FilmParams.identity(extractor.conditionedLayers())
    assert np.array_equal(embed(extractor, params, x),
                          embed(extractor, params, x, film=film))


def test_film_apply():
    h = np.arange(6.0).reshape(2, 3)
    out = filmApply(h, np.array([1.0, 2.0, 0.0]), np.array([0.0, 1.0, 5.0]))
    assert np.array_equal(out, [[0.0, 3.0, 5.0], [3.0, 9.0, 5.0]])
    maps = np.ones((1, 2, 2, 2))
    out = filmApply(maps, np.array([2.0, 3.0]), np.array([0.5, 0.0]))
    assert np.array_equal(out[0, 0], np.full((2, 2), 2.5))
    assert np.array_equal(out[0, 1], np.full((2, 2), 3.0))
    with pytest.raises(ShapeError):
        filmApply(h, np.ones(2), np.zeros(2))


def test_film_gradient(rng):
    layout = ParameterLayout()
    layout.add('h', (2, 3, 2, 2))
    layout.add('gamma', (3,))
    layout.add('beta', (3,))
    params = ParameterVector(layout, rng.uniform(-1, 1, layout.size))

    def program(s):
        return ops.reduceSum(ops.square(filmApply(s['h'], s['gamma'],
                                                  s['beta'])))
    assert checkGrad(program, params, rtol=1e-5).passed


def _ten(width=3, layers=(('a', 4), ('b', 2)), **kwargs):
    ten = TaskEmbeddingNetwork(TenConfig(enabled=True, **kwargs),
                               list(layers), width)
    layout = ParameterLayout()
    ten.declare(layout)
    params = ParameterVector(layout)
    ten.initialize(params, 0)
    return ten, params


def test_ten_starts_at_identity():
    ten, params = _ten()
    film = tenPredict(ten, params.segments(), np.array([0.3, -1.0, 2.0]))
    assert film.names() == ['a', 'b']
    assert np.array_equal(film.gamma('a'), np.ones(4))
    assert np.array_equal(film.beta('b'), np.zeros(2))


def test_ten_delta_regime_with_zero_readout():
    ten, params = _ten(gamma0_init=1.0, beta0_init=1.0)
    film = tenPredict(ten, params.segments(), np.array([0.3, -1.0, 2.0]))
    assert np.array_equal(film.gamma('a'), np.ones(4))
    assert np.array_equal(film.beta('a'), np.zeros(4))


def test_ten_rejects_wrong_task_representation():
    ten, params = _ten()
    with pytest.raises(ShapeError):
        tenPredict(ten, params.segments(), np.zeros(5))


def test_ten_penalty():
    ten, params = _ten(penalty=0.5)
    params['ten/a/gamma0'] = 2.0
    params['ten/b/beta0'] = -1.0
    assert float(ten.penalty(params.segments())) == 0.5 * (4.0 + 1.0)


def test_ten_magnitude_report():
    ten, params = _ten()
    report = tenMagnitudeReport(ten, params)
    assert list(report.layer) == ['a', 'b']
    assert (report[['gamma0', 'beta0']] == 0).all().all()
    params['ten/b/gamma0'] = -0.25
    assert tenMagnitudeReport(ten, params).gamma0.tolist() == [0.0, 0.25]


def test_conditioned_resnet_gradient(rng):
    config = _resnetConfig(blocks=1, depth=2, base_filters=2)
    extractor, _ = buildExtractor(config, rng)
    ten = TaskEmbeddingNetwork(TenConfig(enabled=True),
                               extractor.conditionedLayers(),
                               extractor.outputDim)
    layout = ParameterLayout()
    extractor.declare(layout)
    ten.declare(layout)
    params = ParameterVector(layout)
    extractor.initialize(params, rng)
    ten.initialize(params, rng)
    # move away from the zero readout so every TEN weight matters
    for name in layout.names():
        if name.startswith('ten/'):
            params[name] = rng.uniform(-0.5, 0.5, layout.length(name))
    x = rng.uniform(-1, 1, (2, 3, 8, 8))

    def program(s):
        first = extractor(s, x)
        film = tenPredict(ten, s, ops.reduceMean(first, axis=0))
        return ops.reduceSum(ops.square(extractor(s, x, film)))
    report = checkGrad(program, params, rtol=1e-4, max_per_segment=4)
    assert report.passed, report


def test_output_scale_multiplies_embeddings(rng):
    config = ExtractorConfig(input_shape=(4,), embedding_dim=3)
    extractor, params = buildExtractor(config, 5)
    scaled, scaled_params = buildExtractor(
        ExtractorConfig(input_shape=(4,), embedding_dim=3, output_scale=10.0),
        5)
    x = rng.normal(size=(6, 4))
    assert np.allclose(embed(scaled, scaled_params, x),
                       10.0 * embed(extractor, params, x))
