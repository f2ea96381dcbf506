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


### FC100 superclass partition ###
FC100_TRAIN = (1, 2, 3, 4, 5, 6, 9, 10, 15, 17, 18, 19)
FC100_VAL = (8, 11, 13, 16)
FC100_TEST = (0, 7, 12, 14)
##################################

### Split names ###
SPLIT_TRAIN = 'train'
SPLIT_VAL = 'val'
SPLIT_TEST = 'test'
SPLIT_NAMES = (SPLIT_TRAIN, SPLIT_VAL, SPLIT_TEST)
###################

### CIFAR-100 label spaces ###
CIFAR_FINE_CLASSES = 100
CIFAR_COARSE_CLASSES = 20
##############################

### Model parameter segments ###
SEG_LOG_ALPHA = 'metric/logAlpha'
SEG_AUX_W = 'aux/W'
SEG_AUX_B = 'aux/b'
################################
