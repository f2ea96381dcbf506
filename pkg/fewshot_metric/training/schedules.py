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
Episode-indexed schedules. Both are pure functions of the episode index t
and the total episode budget T.
"""

import numpy as np

AUX_DECAY_BASE = 0.9
LR_FACTOR = 10.0


def auxProbability(t, T, p0=0.9, decay_steps=20):
    """
    Probability of taking an auxiliary step at episode t:
    p0 * 0.9 ** floor(decay_steps * t / T).

    :param int t: Episode index, 0 <= t < T
    :param int T: Total episodes
    :param float p0: Initial probability
    :param int decay_steps: Number of distinct probability values
    """
    _checkIndex(t, T)
    return p0 * AUX_DECAY_BASE ** int(np.floor(decay_steps * t / float(T)))


def learningRate(t, T, lr0=0.1, anneal_every=2500):
    """
    lr0 until T/2, then divided by 10 at T/2, T/2 + anneal_every and
    T/2 + 2 * anneal_every.
    """
    _checkIndex(t, T)
    half = T / 2.0
    if t < half:
        drops = 0
    else:
        drops = 1 + min(2, int((t - half) // anneal_every))
    return lr0 / LR_FACTOR ** drops


def _checkIndex(t, T):
    if T <= 0:
        raise ValueError('Episode budget must be positive, got %r' % T)
    if not 0 <= t < T:
        raise ValueError('Episode index %r outside 0..%d' % (t, T - 1))
