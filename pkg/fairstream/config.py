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

"""
Process-level configuration. The only knobs are the enumeration budget shared
by all brute-force computations and the number of seeds used by the long
property suites, both of which can be set through environment variables.
"""

import os

from fractions import Fraction
from typing import Mapping, Optional

from fairstream.error import ConfigError

__all__ = [
  'DEFAULT_BUDGET',
  'DEFAULT_EPSILON',
  'BUDGET_VARIABLE',
  'SEEDS_VARIABLE',
  'enumeration_budget',
  'seed_count',
]

DEFAULT_BUDGET: int = 3 ** 13
"""The default number of partitions, assignments, or tree nodes per call."""

DEFAULT_EPSILON: Fraction = Fraction(1, 10)
"""The default ε parameterizing the adversarial constructions."""

BUDGET_VARIABLE = 'FAIRSTREAM_BUDGET'
SEEDS_VARIABLE = 'FAIRSTREAM_SEEDS'

def _positive_integer(name: str, text: str) -> int:
  try:
    value = int(text)
  except ValueError:
    raise ConfigError(f'{name}="{text}" is not an integer') from None
  if value <= 0:
    raise ConfigError(f'{name}={value} is not positive')
  return value

def enumeration_budget(
  override: Optional[int] = None,
  environ: Optional[Mapping[str, str]] = None,
) -> int:
  """
  Determine the enumeration budget. An explicit override wins over the
  ``FAIRSTREAM_BUDGET`` environment variable, which wins over the default.

  :raises ConfigError: indicates a budget that is not a positive integer.
  """
  if override is not None:
    if override <= 0:
      raise ConfigError(f'budget {override} is not positive')
    return override
  env = os.environ if environ is None else environ
  text = env.get(BUDGET_VARIABLE)
  if text is None or text.strip() == '':
    return DEFAULT_BUDGET
  return _positive_integer(BUDGET_VARIABLE, text.strip())

def seed_count(default: int, environ: Optional[Mapping[str, str]] = None) -> int:
  """Determine the number of seeds for a property suite."""
  env = os.environ if environ is None else environ
  text = env.get(SEEDS_VARIABLE)
  if text is None or text.strip() == '':
    return default
  return _positive_integer(SEEDS_VARIABLE, text.strip())
