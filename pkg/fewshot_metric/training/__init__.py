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


from .schedules import auxProbability, learningRate
from .optimizer import MomentumSGD
from .evaluation import EvalResult, evaluate, confidenceInterval, seedSequence
from .trainer import (TrainConfig, MetricsLog, TrainingDivergence, AuxPool,
                      METRICS_COLUMNS, SHOT_DEFAULTS, defaultTasksPerBatch,
                      defaultQueries, auxLossProgram, episodicLossProgram,
                      train)
from .alphaSweep import SweepResult, SWEEP_COLUMNS, sweepAlpha
