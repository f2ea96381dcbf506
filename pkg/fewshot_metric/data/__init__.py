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


from .labeledStore import LabeledStore, DatasetSplit
from .cifarReader import (CifarFormatError, RECORD_BYTES, decodeCifarRecords,
                          downsample, loadCifar100, loadCifar100Labels,
                          channelStats,
                          normalizeImages)
from .fc100 import (SplitError, FC100_PARTITION, MANIFEST_COLUMNS,
                    superclassSplit, fc100Split, splitManifest,
                    writeSplitManifest)
from .synthData import SynthConfig, synthStore, synthDataset
from .checkpoint import (CheckpointError, ChecksumError, VersionError,
                         ConfigMismatchError, FORMAT_VERSION, MAGIC,
                         encodeCheckpoint, decodeCheckpoint, saveCheckpoint,
                         loadCheckpoint)
from .storeCache import StoreCache
