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

from fairstream.core import Direction, Representation
from fairstream.error import ValidationError
from fairstream.validator import Validator

def test_keypath():
  data = Validator({ 'tree': { 'next': { '1': { 'row': ['1/2', 3] } } } }, filename='t.json')
  row = data['tree']['next']['1']['row']
  assert row.keypath == '.tree.next["1"].row'
  assert row[0].keypath == '.tree.next["1"].row[0]'
  assert row[0].to_rational() == Fraction(1, 2)
  assert row[1].to_rational() == 3

  with pytest.raises(ValidationError, match=r't\.json\.tree\.next\["1"\] is missing required field marginals'):
    data['tree']['next']['1']['marginals']
  with pytest.raises(IndexError):
    row[2]
  with pytest.raises(TypeError):
    row[0]['x']

def test_scalars():
  assert Validator(3, filename='x').to_integer().value == 3
  assert Validator(2, filename='x').to_agent() == 2
  assert Validator(False, filename='x').to_boolean().value is False
  assert Validator('a', filename='x').to_string().value == 'a'
  assert Validator(None, filename='x').to_label() is None
  assert Validator('inf', filename='x').to_rational() == math.inf
  assert Validator('7/2', filename='x').to_finite() == Fraction(7, 2)

  with pytest.raises(ValidationError, match='is not an integer'):
    Validator(True, filename='x').to_integer()
  with pytest.raises(ValidationError, match='x is not a positive agent index'):
    Validator(0, filename='x').to_agent()
  with pytest.raises(ValidationError, match='is not a boolean'):
    Validator(1, filename='x').to_boolean()
  with pytest.raises(ValidationError, match='is not an exact rational'):
    Validator('0.5', filename='x').to_rational()
  with pytest.raises(ValidationError, match='is not finite'):
    Validator('inf', filename='x').to_finite()
  with pytest.raises(ValidationError, match='is neither a string nor null'):
    Validator(5, filename='x').to_label()

def test_enums():
  assert Validator('goods', filename='x').to_enum(Direction) is Direction.GOODS
  with pytest.raises(ValidationError, match='is not one of chores, goods'):
    Validator('gods', filename='x').to_enum(Direction)

  choices = [Representation.ADDITIVE, Representation.MATROID]
  assert Validator('matroid', filename='x').to_enum(Representation, choices) is (
    Representation.MATROID)
  with pytest.raises(ValidationError, match='is not one of additive, matroid'):
    Validator('explicit', filename='x').to_enum(Representation, choices)

def test_lists():
  assert Validator([], filename='x').to_list(allow_empty=True).value == []
  assert [v.value for v in Validator([1, 2], filename='x').to_list().items()] == [1, 2]

  with pytest.raises(ValidationError, match='is the empty list'):
    Validator([], filename='x').to_list()
  with pytest.raises(ValidationError, match='is not a list'):
    Validator({}, filename='x').to_list()

def test_rows():
  assert Validator(['1/2', 3], filename='x').to_row(2) == (Fraction(1, 2), Fraction(3))
  assert Validator(['a', None], filename='x').to_labels() == ('a', None)

  with pytest.raises(ValidationError, match=r'x has 1 entries for 2 agents'):
    Validator([1], filename='x').to_row(2)
  with pytest.raises(ValidationError, match=r'x\[1\] is not finite'):
    Validator([1, 'inf'], filename='x').to_row()
  with pytest.raises(ValidationError, match=r'x\[0\] is neither a string nor null'):
    Validator([1], filename='x').to_labels(1)

def test_objects():
  data = Validator({ 'n': 2, 'direction': 'goods' }, filename='x').to_object({ 'n', 'direction' })
  assert data.has('n')
  assert not data.has('deadline')
  assert data.optional('deadline') is None
  n = data.optional('n')
  assert n is not None and n.keypath == '.n'

  with pytest.raises(ValidationError, match='contains unexpected field extra'):
    Validator({ 'extra': 1 }, filename='x').to_object({ 'n' })
  with pytest.raises(ValidationError, match='is not an object'):
    Validator([1], filename='x').to_object()
