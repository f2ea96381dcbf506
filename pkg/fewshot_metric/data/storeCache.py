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


from contextlib import closing
import hashlib
import json
import logging
import os
import sqlite3

import h5py as h5
import numpy as np

from .labeledStore import LabeledStore

logger = logging.getLogger('fewShot.data')

DB_NAME = 'store_cache.db'


class StoreCache(object):

    '''
    Cache of generated or decoded LabeledStores.

    The catalog of cached stores lives in a sqlite3 database inside the
    cache directory; every store is kept in its own HDF5 file next to it.
    A store is identified by its kind ('cifar100', 'synthetic') and the
    parameters it was generated with.
    '''

    def __init__(self, directory):
        self.directory = directory
        if not os.path.isdir(directory):
            os.makedirs(directory)
        self.dbFile = os.path.join(directory, DB_NAME)
        with closing(sqlite3.connect(self.dbFile)) as conn:
            conn.execute('create table if not exists stores('
                         'kind, params, filename)')
            conn.commit()

    @staticmethod
    def paramKey(params):
        return json.dumps(params, sort_keys=True)

    def lookup(self, kind, params):
        """
        :return: Path of the cached store, None when not cached
        """
        with closing(sqlite3.connect(self.dbFile)) as conn:
            row = conn.execute('select filename from stores where kind = ? '
                               'and params = ?',
                               (kind, self.paramKey(params))).fetchone()
        if row is None:
            return None
        path = os.path.join(self.directory, row[0])
        return path if os.path.isfile(path) else None

    def save(self, store, kind, params):
        key = self.paramKey(params)
        fname = '%s_%s.h5' % (kind, hashlib.sha1(
            key.encode('utf-8')).hexdigest()[:16])
        path = os.path.join(self.directory, fname)
        tmp = path + '.tmp'
        with h5.File(tmp, 'w') as f:
            f.create_dataset('inputs', data=store.inputs)
            f.create_dataset('fine', data=store.fine)
            f.create_dataset('coarse', data=store.coarse)
            f.attrs['name'] = store.name
            f.attrs['norm_stats'] = json.dumps(store.norm_stats)
        os.replace(tmp, path)
        with closing(sqlite3.connect(self.dbFile)) as conn:
            conn.execute('delete from stores where kind = ? and params = ?',
                         (kind, key))
            conn.execute('insert into stores values (?, ?, ?)',
                         (kind, key, fname))
            conn.commit()
        return path

    @staticmethod
    def load(path):
        with h5.File(path, 'r') as f:
            name = f.attrs['name']
            if isinstance(name, bytes):
                name = name.decode('utf-8')
            return LabeledStore(np.array(f['inputs']), np.array(f['fine']),
                                np.array(f['coarse']),
                                norm_stats=json.loads(f.attrs['norm_stats']),
                                name=str(name))

    def getOrCreate(self, kind, params, factory):
        """
        Cached store for (kind, params), built with factory() on a miss.
        """
        path = self.lookup(kind, params)
        if path is not None:
            logger.info('Store cache hit: %s', path)
            return self.load(path)
        logger.info('Store cache miss for %s, generating', kind)
        store = factory()
        self.save(store, kind, params)
        return store
