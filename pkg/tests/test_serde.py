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

import math
import pytest

from fractions import Fraction

from fairstream.core import Decision, Direction
from fairstream.error import ValidationError
from fairstream.serde import (
  dumps, dumps_line, format_rational, loads, parse_rational, prepare, read_lines
)

def test_format_rational():
  assert format_rational(Fraction(1, 10)) == '1/10'
  assert format_rational(Fraction(10)) == '10/1'
  assert format_rational(3) == '3/1'
  assert format_rational(Fraction(-2, 4)) == '-1/2'
  assert format_rational(math.inf) == 'inf'
  with pytest.raises(ValueError):
    format_rational(0.5)

def test_parse_rational():
  assert parse_rational('1/10') == Fraction(1, 10)
  assert parse_rational('10/1') == 10
  assert parse_rational(' 4 / 6 ') == Fraction(2, 3)
  assert parse_rational('-3') == -3
  assert parse_rational(7) == 7
  assert isinstance(parse_rational(7), Fraction)
  assert parse_rational('inf') == math.inf

  for bad in ('0.1', 0.1, True, None, '1/0', 'ten', [1]):
    with pytest.raises(ValidationError):
      parse_rational(bad)

def test_loads_dumps():
  json = loads(b'{"answer": 42}')

  assert isinstance(json, dict)
  assert json['answer'] == 42

  json['some_noise'] = None
  json['noise'] = []
  json['ratio'] = Fraction(8, 11)
  json['unbounded'] = math.inf
  json['direction'] = Direction.CHORES
  json['agents'] = frozenset({3, 1, 2})
  assert dumps(json) == (
    '{"answer": 42, "ratio": "8/11", "unbounded": "inf", "direction": "chores", '
    '"agents": [1, 2, 3]}'
  )

def test_prepare_uses_to_dict():
  assert prepare(Decision.assign(2)) == { 'decision': 'assign', 'agent': 2 }
  assert prepare([Decision.discard(), (Fraction(1, 2), None)]) == [
    { 'decision': 'discard' }, ['1/2', None]
  ]
  assert prepare({ 'nested': { 'empty': (), 'kept': False } }) == {
    'nested': { 'kept': False }
  }

def test_dumps_line():
  assert dumps_line({ 'round': 2, 'values': [Fraction(10), Fraction(1, 10)] }) == (
    '{"round":2,"values":["10/1","1/10"]}\n'
  )
  assert dumps_line({ 'label': 'Küche' }) == '{"label":"Küche"}\n'

def test_read_lines():
  text = '{"a":1}\n\n  \n[2]\n'
  assert list(read_lines(text)) == [(1, { 'a': 1 }), (4, [2])]

  with pytest.raises(ValidationError, match='line 2'):
    list(read_lines('{}\n{oops}\n'))
