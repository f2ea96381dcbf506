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


from contextlib import contextmanager
import os
import tempfile


@contextmanager
def atomicWrite(path, mode='w'):
    """
    Open a temporary file next to *path* and move it over *path* when the
    block exits without error.
    """
    path = os.path.abspath(path)
    directory = os.path.dirname(path)
    if not os.path.isdir(directory):
        os.makedirs(directory)
    fd, tmp = tempfile.mkstemp(prefix='.' + os.path.basename(path),
                               dir=directory)
    try:
        newline = '' if 'b' not in mode else None
        with os.fdopen(fd, mode, newline=newline) as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def writeFrame(df, path, **kwargs):
    """
    Write a DataFrame as CSV atomically (header row, no index).
    """
    with atomicWrite(path) as f:
        df.to_csv(f, index=False, **kwargs)
