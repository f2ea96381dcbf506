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
Command line entry point.

    fewShotRunner train --config run.cfg --out results/
    fewShotRunner eval --config run.cfg --checkpoint results/checkpoint.fsm
    fewShotRunner verify-lemma --trials 20 --seed 7
    fewShotRunner sweep-alpha --config run.cfg --out sweep/
    fewShotRunner split-fc100 --data cifar/ --out manifest.csv
    fewShotRunner report-ten --checkpoint results/checkpoint.fsm

Exit status: 0 on success, 1 on usage or configuration errors, 2 on any
other failure. Every artifact is written atomically.
"""

import argparse
from importlib import resources
import logging
import logging.config
import os
import sys

import pandas as pd

from .FewShotModel import FewShotModel
from .data import (StoreCache, fc100Split, loadCifar100, loadCifar100Labels,
                   loadCheckpoint, saveCheckpoint, superclassSplit,
                   writeSplitManifest, synthStore)
from .data.synthData import synthPartition
from .fileTools import writeFrame
from .initialConfiguration import (ConfigError, DATA_DIR_ENV, echoConfig,
                                   loadConfig, writeEcho)
from .lemmaVerification import lemmaSummary, lemmaTrials
from .training import evaluate, sweepAlpha, train
from . import splitID

logger = logging.getLogger('fewShot.runner')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

EVAL_COLUMNS = ['split', 'ways', 'shots', 'tasks', 'queries', 'restarts',
                'accuracy', 'ci']


class UsageError(Exception):
    pass


class RunnerArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def configureLogging(verbose=False):
    conf = resources.files(__package__).joinpath('logging.conf')
    with resources.as_file(conf) as path:
        logging.config.fileConfig(str(path), disable_existing_loggers=False)
    if verbose:
        logging.getLogger('fewShot').setLevel(logging.DEBUG)


def _grid(raw):
    try:
        grid = [float(v) for v in raw.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('invalid alpha grid %r' % raw)
    if not grid or any(not a > 0 for a in grid):
        raise argparse.ArgumentTypeError('alpha grid needs positive values')
    return grid


def _positiveInt(raw):
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError('%r is not an integer' % raw)
    if value < 1:
        raise argparse.ArgumentTypeError('%r is not positive' % raw)
    return value


def buildParser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', action='store_true',
                        help='Debug logging')

    parser = RunnerArgumentParser(
        prog='fewShotRunner',
        description='Metric-scaled, task-conditioned few-shot learning.')
    sub = parser.add_subparsers(dest='command', metavar='command',
                                parser_class=RunnerArgumentParser)
    sub.required = True

    p = sub.add_parser('train', parents=[common],
                       help='Train, checkpoint and evaluate a model')
    p.add_argument('--config', help='Configuration file')
    p.add_argument('--out', default='.', help='Output directory')
    p.add_argument('--cache-dir', help='Store cache directory')
    p.add_argument('--workers', type=_positiveInt,
                   help='Evaluation worker processes')

    p = sub.add_parser('eval', parents=[common],
                       help='Evaluate a checkpoint')
    p.add_argument('--config', help='Configuration file')
    p.add_argument('--checkpoint', required=True, help='Checkpoint file')
    p.add_argument('--out', default='.', help='Output directory')
    p.add_argument('--split', choices=splitID.SPLIT_NAMES,
                   help='Split to evaluate on')
    p.add_argument('--cache-dir', help='Store cache directory')
    p.add_argument('--workers', type=_positiveInt,
                   help='Evaluation worker processes')

    p = sub.add_parser('verify-lemma', parents=[common],
                       help='Check the temperature limits of the gradient')
    p.add_argument('--trials', type=_positiveInt, default=20)
    p.add_argument('--seed', type=int, default=7)
    p.add_argument('--out', default='.', help='Output directory')

    p = sub.add_parser('sweep-alpha', parents=[common],
                       help='Validation accuracy over an alpha grid')
    p.add_argument('--config', help='Configuration file')
    p.add_argument('--grid', type=_grid,
                   help='Comma separated alpha values')
    p.add_argument('--cheap', action='store_true',
                   help='Evaluate a trained checkpoint instead of training '
                   'per alpha')
    p.add_argument('--checkpoint', help='Checkpoint for --cheap')
    p.add_argument('--out', default='.', help='Output directory')
    p.add_argument('--cache-dir', help='Store cache directory')
    p.add_argument('--workers', type=_positiveInt,
                   help='Evaluation worker processes')

    p = sub.add_parser('split-fc100', parents=[common],
                       help='Write the FC100 class manifest')
    p.add_argument('--data', help='CIFAR-100 binary directory')
    p.add_argument('--out', default='fc100_manifest.csv',
                   help='Manifest file')

    p = sub.add_parser('report-ten', parents=[common],
                       help='|gamma0| and |beta0| per conditioned layer')
    p.add_argument('--checkpoint', required=True, help='Checkpoint file')
    p.add_argument('--out', default='ten_report.csv', help='Report file')
    return parser


def buildData(data, cache_dir=None):
    """
    :param DataConfig data: Data configuration
    :return: (store, OrderedDict of train/val/test splits)
    """
    cache = StoreCache(cache_dir) if cache_dir else None
    if data.source == 'synthetic':
        synth = data.synthConfig()
        make = lambda: synthStore(synth)
        store = cache.getOrCreate('synthetic', synth.toDict(), make) \
            if cache else make()
        return store, superclassSplit(store, synthPartition(synth))

    make = lambda: loadCifar100(data.path, size=data.image_size,
                                normalize=data.normalize)
    key = {'path': os.path.abspath(data.path), 'size': data.image_size,
           'normalize': data.normalize}
    store = cache.getOrCreate('cifar100', key, make) if cache else make()
    return store, fc100Split(store)


def _cacheDir(args, config):
    return args.cache_dir or config.data.cache_dir


def _outDir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path


def _evalFrame(config, split, result):
    return pd.DataFrame([(split, config.train.ways, config.train.shots,
                          config.eval.tasks, config.eval.queries,
                          config.eval.restarts, result.accuracy, result.ci)],
                        columns=EVAL_COLUMNS)


def _evaluate(model, config, splits, split, workers):
    return evaluate(model, splits[split], n_tasks=config.eval.tasks,
                    n_queries=config.eval.queries,
                    restarts=config.eval.restarts, rng=config.train.seed,
                    ways=config.train.ways, shots=config.train.shots,
                    workers=workers or config.eval.workers)


def _modelFactory(config, aux_classes):
    def makeModel(alpha):
        return FewShotModel(config.extractor, config.ten,
                            config.head.withAlpha(alpha), aux_classes,
                            rng=config.train.seed)
    return makeModel


def _loadRun(args):
    config = loadConfig(args.config)
    logger.info('Resolved configuration:\n%s', echoConfig(config))
    return config


def commandTrain(args):
    config = _loadRun(args)
    out = _outDir(args.out)
    writeEcho(config, os.path.join(out, 'config_echo.cfg'))
    store, splits = buildData(config.data, _cacheDir(args, config))
    train_split = splits[splitID.SPLIT_TRAIN]
    aux_classes = len(train_split.class_ids) if config.train.aux_enabled \
        else 0
    makeModel = _modelFactory(config, aux_classes)

    alpha = config.head.alpha
    if config.train.alpha_mode == 'sweep':
        sweep = sweepAlpha(config.train, config.train.alpha_grid,
                           train_split, splits[splitID.SPLIT_VAL],
                           makeModel=makeModel,
                           n_tasks=config.train.val_tasks,
                           workers=args.workers or 1)
        writeFrame(sweep.table, os.path.join(out, 'alpha_sweep.csv'))
        alpha = sweep.bestAlpha
        logger.info('Cross-validated alpha = %g', alpha)

    model, log = train(makeModel(alpha), config.train, train_split,
                       splits[splitID.SPLIT_VAL])
    writeFrame(log.frame(), os.path.join(out, 'metrics.csv'), na_rep='nan')
    saveCheckpoint(model, os.path.join(out, 'checkpoint.fsm'), config.train,
                   store.norm_stats)
    if model.hasTen:
        writeFrame(model.tenReport(), os.path.join(out, 'ten_report.csv'))
    result = _evaluate(model, config, splits, config.eval.split, args.workers)
    writeFrame(_evalFrame(config, config.eval.split, result),
               os.path.join(out, 'test_eval.csv'))
    logger.info('%s accuracy %s', config.eval.split, result)
    return EXIT_OK


def _expectedEcho(config):
    return {'extractor': config.extractor.toDict(),
            'ten': config.ten.toDict()}


def commandEval(args):
    config = _loadRun(args)
    out = _outDir(args.out)
    model = loadCheckpoint(args.checkpoint, expected=_expectedEcho(config))
    _, splits = buildData(config.data, _cacheDir(args, config))
    split = args.split or config.eval.split
    result = _evaluate(model, config, splits, split, args.workers)
    writeFrame(_evalFrame(config, split, result),
               os.path.join(out, 'eval.csv'))
    logger.info('%s accuracy %s', split, result)
    return EXIT_OK


def commandVerifyLemma(args):
    out = _outDir(args.out)
    report = lemmaTrials(trials=args.trials, seed=args.seed)
    writeFrame(report, os.path.join(out, 'lemma_report.csv'))
    passed, worst = lemmaSummary(report)
    logger.info('Worst relative error at the extreme alphas: small %.3g, '
                'large %.3g', worst['small'], worst['large'])
    if not passed:
        sys.stderr.write('fewShotRunner: limit check failed (small %.3g, '
                         'large %.3g)\n' % (worst['small'], worst['large']))
        return EXIT_FAILURE
    return EXIT_OK


def commandSweepAlpha(args):
    config = _loadRun(args)
    if args.cheap and not args.checkpoint:
        raise UsageError('--cheap needs --checkpoint')
    out = _outDir(args.out)
    writeEcho(config, os.path.join(out, 'config_echo.cfg'))
    _, splits = buildData(config.data, _cacheDir(args, config))
    train_split = splits[splitID.SPLIT_TRAIN]
    grid = args.grid or config.train.alpha_grid
    if args.cheap:
        model = loadCheckpoint(args.checkpoint,
                               expected=_expectedEcho(config))
        sweep = sweepAlpha(config.train, grid, train_split,
                           splits[splitID.SPLIT_VAL], model=model, cheap=True,
                           n_tasks=config.eval.tasks,
                           n_queries=config.eval.queries,
                           workers=args.workers or 1)
    else:
        aux_classes = len(train_split.class_ids) \
            if config.train.aux_enabled else 0
        sweep = sweepAlpha(config.train, grid, train_split,
                           splits[splitID.SPLIT_VAL],
                           makeModel=_modelFactory(config, aux_classes),
                           n_tasks=config.eval.tasks,
                           n_queries=config.eval.queries,
                           workers=args.workers or 1)
    writeFrame(sweep.table, os.path.join(out, 'alpha_sweep.csv'))
    logger.info('Best alpha %g', sweep.bestAlpha)
    return EXIT_OK


def commandSplitFc100(args):
    path = args.data or os.environ.get(DATA_DIR_ENV)
    if not path:
        raise UsageError('--data (or %s) is required' % DATA_DIR_ENV)
    splits = fc100Split(loadCifar100Labels(path))
    df = writeSplitManifest(splits, args.out)
    logger.info('Wrote %d classes to %s', len(df), args.out)
    return EXIT_OK


def commandReportTen(args):
    model = loadCheckpoint(args.checkpoint)
    writeFrame(model.tenReport(), args.out)
    return EXIT_OK


COMMANDS = {'train': commandTrain,
            'eval': commandEval,
            'verify-lemma': commandVerifyLemma,
            'sweep-alpha': commandSweepAlpha,
            'split-fc100': commandSplitFc100,
            'report-ten': commandReportTen}


def run(argv=None):
    """
    Run one command.

    :param list argv: Arguments without the program name
    :return: Exit status
    :rtype: int
    """
    try:
        args = buildParser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write('fewShotRunner: error: %s\n' % e)
        return EXIT_USAGE
    configureLogging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as e:
        sys.stderr.write('fewShotRunner: error: %s\n' % e)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, KeyError, EnvironmentError) as e:
        logger.debug('Command %s failed', args.command, exc_info=True)
        sys.stderr.write('fewShotRunner: %s: %s\n' %
                         (type(e).__name__, e))
        return EXIT_FAILURE


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
