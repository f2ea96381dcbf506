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


from setuptools import setup, find_packages

setup(name='fewshot_metric',
      version='0.1',
      license='Apache-2.0',
      description='Metric-scaled, task-conditioned few-shot classification',
      packages=find_packages(exclude=['Tests', 'Tests.*']),
      package_data={'fewshot_metric': ['logging.conf']},
      entry_points={
          'console_scripts':
          ['fewShotRunner = fewshot_metric.fewShotRunner:main']
      },
      python_requires='>=3.9',
      install_requires=['numpy', 'scipy', 'pandas', 'h5py'],
      extras_require={'test': ['pytest']},
      include_package_data=True,
      )
