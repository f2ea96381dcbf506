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
Run configuration files.

A configuration file holds `key = value` lines under the section headers
[data], [extractor], [ten], [train] and [eval]. Omitted keys take their
defaults; unknown sections or keys are errors. Lists are comma separated.

The number of tasks per batch and of queries per task default by shot
count: 5 tasks x 12 queries for 1 shot, 2 x 32 for 5 shots, 1 x 64 for 10
shots, otherwise 1 task of ways * shots queries.
"""

from collections import OrderedDict
from dataclasses import dataclass, asdict, fields
import configparser
import logging
import os
import re

from .data.synthData import SynthConfig
from .embedding import ExtractorConfig, TenConfig, makeExtractor
from .fileTools import atomicWrite
from .metric import SIMILARITY_KINDS, ScaledMetricHead
from .training import TrainConfig
from .training.trainer import ALPHA_MODES
from .episodes import REDUCTIONS
from .embedding.extractor import (EXTRACTOR_KINDS, NORMALIZATION_MODES,
                                  NORM_SCOPES)
from . import splitID

logger = logging.getLogger('fewShot.config')

DATA_DIR_ENV = 'FEWSHOT_DATA_DIR'
DATA_SOURCES = ('synthetic', 'cifar100')


class ConfigError(ValueError):

    def __init__(self, message, key=None, line=None):
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super(ConfigError, self).__init__(message)
        self.key = key
        self.line = line


@dataclass
class DataConfig:
    source: str = 'synthetic'
    path: str = None
    image_size: int = 8
    normalize: bool = True
    cache_dir: str = None
    classes: int = 20
    superclasses: int = 4
    dim: tuple = (4,)
    superclass_scale: float = 3.0
    mean_scale: float = 1.0
    within_scale: float = 0.3
    samples_per_class: int = 60
    split: tuple = (2, 1, 1)
    seed: int = 0
    nuisance_dims: int = 0
    nuisance_scale: float = 1.0
    label_noise: float = 0.0

    def inputShape(self):
        if self.source == 'cifar100':
            return (3, self.image_size, self.image_size)
        return tuple(self.dim)

    def synthConfig(self):
        return SynthConfig(n_classes=self.classes,
                           n_superclasses=self.superclasses,
                           input_shape=self.dim,
                           superclass_scale=self.superclass_scale,
                           mean_scale=self.mean_scale,
                           within_scale=self.within_scale,
                           samples_per_class=self.samples_per_class,
                           split_superclasses=self.split, seed=self.seed,
                           nuisance_dims=self.nuisance_dims,
                           nuisance_scale=self.nuisance_scale,
                           label_noise=self.label_noise)


@dataclass
class EvalConfig:
    tasks: int = 500
    queries: int = 100
    restarts: int = 1
    workers: int = 1
    split: str = splitID.SPLIT_TEST


@dataclass
class RunConfig:
    data: DataConfig
    extractor: ExtractorConfig
    ten: TenConfig
    train: TrainConfig
    eval: EvalConfig
    head: ScaledMetricHead


### Value converters ###

def _optional(convert):
    def parse(raw):
        return None if raw.strip() == '' else convert(raw)
    return parse


def _bool(raw):
    value = raw.strip().lower()
    if value not in configparser.ConfigParser.BOOLEAN_STATES:
        raise ValueError('not a boolean: %r' % raw)
    return configparser.ConfigParser.BOOLEAN_STATES[value]


def _list(convert):
    def parse(raw):
        return tuple(convert(v) for v in raw.split(',') if v.strip())
    return parse


def _choice(*options):
    def parse(raw):
        value = raw.strip()
        if value not in options:
            raise ValueError('expected one of %s' % ', '.join(options))
        return value
    return parse


def _str(raw):
    return raw.strip()


### Range checks ###

def _positive(v):
    return v is None or (v > 0 if not isinstance(v, tuple)
                         else all(x > 0 for x in v))


def _nonNegative(v):
    return v >= 0


def _probability(v):
    return 0 < v <= 1


def _unitInterval(v):
    return 0 <= v < 1


def _any(v):
    return True


def _atLeastTwo(v):
    return v >= 2


# section -> key -> (converter, check)
SCHEMA = OrderedDict([
    ('data', OrderedDict([
        ('source', (_choice(*DATA_SOURCES), _any)),
        ('path', (_optional(_str), _any)),
        ('image_size', (int, _positive)),
        ('normalize', (_bool, _any)),
        ('cache_dir', (_optional(_str), _any)),
        ('classes', (int, _positive)),
        ('superclasses', (int, _positive)),
        ('dim', (_list(int), _positive)),
        ('superclass_scale', (float, _nonNegative)),
        ('mean_scale', (float, _nonNegative)),
        ('within_scale', (float, _nonNegative)),
        ('samples_per_class', (int, _positive)),
        ('split', (_list(int), _positive)),
        ('seed', (int, _nonNegative)),
        ('nuisance_dims', (int, _nonNegative)),
        ('nuisance_scale', (float, _nonNegative)),
        ('label_noise', (float, _unitInterval)),
    ])),
    ('extractor', OrderedDict([
        ('kind', (_choice(*EXTRACTOR_KINDS), _any)),
        ('embedding_dim', (int, _positive)),
        ('hidden_widths', (_list(int), _positive)),
        ('bias', (_bool, _any)),
        ('blocks', (int, _positive)),
        ('depth', (int, _positive)),
        ('base_filters', (int, _positive)),
        ('conditioned', (_optional(_list(_bool)), _any)),
        ('weight_decay', (float, _nonNegative)),
        ('normalization', (_choice(*NORMALIZATION_MODES), _any)),
        ('norm_scope', (_choice(*NORM_SCOPES), _any)),
        ('output_scale', (float, _positive)),
    ])),
    ('ten', OrderedDict([
        ('enabled', (_bool, _any)),
        ('penalty', (float, _nonNegative)),
        ('gamma0_init', (float, _any)),
        ('beta0_init', (float, _any)),
    ])),
    ('train', OrderedDict([
        ('ways', (int, _atLeastTwo)),
        ('shots', (int, _positive)),
        ('tasks_per_batch', (_optional(int), _positive)),
        ('queries_per_task', (_optional(int), _positive)),
        ('episodes', (int, _positive)),
        ('momentum', (float, _unitInterval)),
        ('lr0', (float, _positive)),
        ('lr_anneal_every', (int, _positive)),
        ('aux_enabled', (_bool, _any)),
        ('aux_p0', (float, _probability)),
        ('aux_decay_steps', (int, _nonNegative)),
        ('aux_batch', (int, _positive)),
        ('similarity', (_choice(*SIMILARITY_KINDS), _any)),
        ('alpha_mode', (_choice(*ALPHA_MODES), _any)),
        ('alpha', (float, _positive)),
        ('alpha_grid', (_list(float), _positive)),
        ('loss_reduction', (_choice(*REDUCTIONS), _any)),
        ('val_every', (int, _positive)),
        ('val_tasks', (int, _positive)),
        ('patience', (int, _nonNegative)),
        ('seed', (int, _nonNegative)),
    ])),
    ('eval', OrderedDict([
        ('tasks', (int, _positive)),
        ('queries', (int, _positive)),
        ('restarts', (int, _positive)),
        ('workers', (int, _positive)),
        ('split', (_choice(*splitID.SPLIT_NAMES), _any)),
    ])),
])


def _lineOf(text, section, key):
    current = None
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        header = re.match(r'^\[([^\]]+)\]', stripped)
        if header:
            current = header.group(1).strip()
        elif current == section and re.match(
                r'^%s\s*[=:]' % re.escape(key), stripped):
            return number
    return None


def parseConfig(text, source='<string>'):
    """
    Parse configuration text into checked per-section values.

    :return: section -> {key: value} for the keys present in the text
    :raises ConfigError: on syntax errors, unknown keys or invalid values
    """
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError('key outside a [section]', line=e.lineno)
    except (configparser.DuplicateSectionError,
            configparser.DuplicateOptionError) as e:
        raise ConfigError(e.message.splitlines()[0], line=e.lineno)
    except configparser.ParsingError as e:
        raise ConfigError('cannot parse %r' % e.errors[0][1],
                          line=e.errors[0][0])

    values = OrderedDict()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError('unknown section [%s]' % section, key=section,
                              line=_sectionLine(text, section))
        values[section] = OrderedDict()
        for key, raw in parser.items(section):
            line = _lineOf(text, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError('unknown key %s.%s' % (section, key),
                                  key=key, line=line)
            convert, check = SCHEMA[section][key]
            try:
                value = convert(raw)
            except ValueError as e:
                raise ConfigError('invalid value %r for %s.%s (%s)' %
                                  (raw.strip(), section, key, e),
                                  key=key, line=line)
            if not check(value):
                raise ConfigError('value %r out of range for %s.%s' %
                                  (raw.strip(), section, key),
                                  key=key, line=line)
            values[section][key] = value
    return values


def _sectionLine(text, section):
    for number, line in enumerate(text.splitlines(), 1):
        if line.strip().startswith('[%s]' % section):
            return number
    return None


def resolveConfig(values=None):
    """
    Apply defaults, the data directory override and the shot dependent
    defaults, then validate the combination.

    :rtype: RunConfig
    """
    values = values or {}
    data = DataConfig(**values.get('data', {}))
    if os.environ.get(DATA_DIR_ENV):
        data.path = os.environ[DATA_DIR_ENV]
    train_values = dict(values.get('train', {}))
    similarity = train_values.pop('similarity', SIMILARITY_KINDS[0])
    try:
        extractor = ExtractorConfig(input_shape=data.inputShape(),
                                    **values.get('extractor', {}))
        makeExtractor(extractor)
        ten = TenConfig(**values.get('ten', {})).validate()
        train = TrainConfig(**train_values).validate()
        head = ScaledMetricHead(similarity, train.alpha,
                                trainable=train.alpha_mode == 'trainable')
        if data.source == 'synthetic':
            data.synthConfig().validate()
        elif not data.path:
            raise ValueError('data.path (or %s) is required for cifar100' %
                             DATA_DIR_ENV)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e))
    return RunConfig(data, extractor, ten, train,
                     EvalConfig(**values.get('eval', {})), head)


def loadConfig(path):
    """
    Read, check and resolve a configuration file.

    :param str path: Configuration file, None for all defaults
    :rtype: RunConfig
    :raises ConfigError: on a missing file or any invalid entry
    """
    if path is None:
        return resolveConfig()
    if not os.path.isfile(path):
        raise ConfigError('configuration file %s not found' % path)
    with open(path) as f:
        text = f.read()
    return resolveConfig(parseConfig(text, source=path))


def _format(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (tuple, list)):
        return ', '.join(_format(v) for v in value)
    return str(value)


def echoConfig(config):
    """
    Fully resolved configuration in the file format.

    :rtype: str
    """
    resolved = OrderedDict([
        ('data', asdict(config.data)),
        ('extractor', dict((f.name, getattr(config.extractor, f.name))
                           for f in fields(config.extractor))),
        ('ten', asdict(config.ten)),
        ('train', dict(asdict(config.train), similarity=config.head.kind)),
        ('eval', asdict(config.eval)),
    ])
    lines = []
    for section, keys in SCHEMA.items():
        lines.append('[%s]' % section)
        lines.extend('%s = %s' % (key, _format(resolved[section][key]))
                     for key in keys)
        lines.append('')
    return '\n'.join(lines)


def writeEcho(config, path):
    with atomicWrite(path) as f:
        f.write(echoConfig(config))
