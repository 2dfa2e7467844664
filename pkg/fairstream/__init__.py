# Copyright 2021 Robert Grimm
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

"""Audit and attack online fair allocation of goods and chores"""
__version__ = "0.1.0"

__all__ = [
  'adversaries',
  'algorithms',
  'audit',
  'cli',
  'config',
  'core',
  'error',
  'generators',
  'harness',
  'ingest',
  'logger',
  'protocol',
  'serde',
  'validator',
  'valuations',
]
