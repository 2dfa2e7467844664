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

import pytest

from fractions import Fraction

from fairstream.core import Decision, Direction, Item, Representation
from fairstream.error import ValidationError
from fairstream.ingest import (
  load_decisions,
  load_stream,
  read_decisions,
  read_stream,
  save_decisions,
  save_stream,
  write_decisions,
  write_stream,
)

from .instances import additive, matroid

INSTANCE = '''\
{"direction":"goods","n":2,"classes":["bivalued(1,5)","bivalued(1/1,5/1)"]}
{"id":1,"values":["1/1","5/1"]}

{"values":[5,"5"]}
'''

def test_read_stream():
  stream = read_stream(INSTANCE)
  assert stream.direction is Direction.GOODS
  assert stream.n == 2
  assert stream.deadline == 0
  assert stream.representation is Representation.ADDITIVE
  assert stream.profile == ('bivalued(1/1,5/1)', 'bivalued(1/1,5/1)')
  assert stream.items == (
    Item(1, values=(Fraction(1), Fraction(5))),
    Item(2, values=(Fraction(5), Fraction(5))),
  )

def test_read_header_options():
  stream = read_stream(
    '{"direction":"chores","n":3,"deadline":1,"class":"binary","monotone":true}\n')
  assert stream.direction is Direction.CHORES
  assert stream.deadline == 1
  assert stream.profile == ('binary',) * 3
  assert stream.monotone
  assert stream.items == ()

  stream = read_stream(
    '{"direction":"goods","n":2,"representation":"matroid",'
    '"universes":[["a","b"],["c"]]}\n'
    '{"categories":["a",null]}\n'
    '{"categories":["b","c"]}\n'
  )
  assert stream.representation is Representation.MATROID
  assert stream.universes == (('a', 'b'), ('c',))
  assert stream.items[0].categories == ('a', None)

@pytest.mark.parametrize('text,message', [
  ('', 'has no header'),
  ('{"direction":"goods","n":2\n', 'not valid JSON'),
  ('{"direction":"both","n":2}\n', 'is not one of chores, goods'),
  ('{"direction":"goods","n":0}\n', 'is not a positive agent count'),
  ('{"direction":"goods","n":2,"deadline":2}\n', 'is neither 0 nor 1'),
  ('{"direction":"goods","n":2,"agents":2}\n', 'unexpected field agents'),
  ('{"direction":"goods","n":2,"class":"binary","classes":["binary","binary"]}\n',
   'has both class and classes'),
  ('{"direction":"goods","n":2,"classes":["binary"]}\n', 'has 1 entries for 2 agents'),
  ('{"direction":"goods","n":2,"class":"fancy"}\n', 'is not a valuation class'),
  ('{"direction":"goods","n":2,"representation":"explicit"}\n', 'is not one of'),
  ('{"direction":"goods","n":2}\n{"id":2,"values":[1,1]}\n', 'is 2 for item in position 1'),
  ('{"direction":"goods","n":2}\n{"values":[1,"0.5"]}\n', 'is not an exact rational'),
  ('{"direction":"goods","n":2}\n{"values":[1,"inf"]}\n', 'is not finite'),
  ('{"direction":"goods","n":2}\n{"values":[1]}\n', 'has 1 entries for 2 agents'),
  ('{"direction":"goods","n":2}\n{"values":[1,-1]}\n', 'negative'),
  ('{"direction":"goods","n":2}\n{"categories":["a","b"]}\n', 'categories in an additive'),
  ('{"direction":"goods","n":2,"representation":"matroid"}\n{"values":[1,1]}\n',
   'values in a matroid'),
  ('{"direction":"goods","n":1,"representation":"matroid","universes":[["a"]]}\n'
   '{"categories":["b"]}\n', 'outside the universe'),
])
def test_read_stream_errors(text, message):
  with pytest.raises(ValidationError, match=message):
    read_stream(text, 'bad.jsonl')

def test_errors_name_file_and_line():
  with pytest.raises(ValidationError) as info:
    read_stream('{"direction":"goods","n":2}\n\n{"values":[1,"x"]}\n', 'bad.jsonl')
  assert str(info.value).startswith('bad.jsonl:3')

def test_write_stream():
  stream = additive(Direction.GOODS, [(1, 5), (Fraction(1, 2), 0)])
  assert write_stream(stream) == (
    '{"direction":"goods","n":2}\n'
    '{"id":1,"values":["1/1","5/1"]}\n'
    '{"id":2,"values":["1/2","0/1"]}\n'
  )

  stream = matroid(
    Direction.CHORES, [('a', None)], deadline=1, profile=('supermodular-binary',) * 2)
  assert write_stream(stream) == (
    '{"direction":"chores","n":2,"deadline":1,"representation":"matroid",'
    '"classes":["supermodular-binary","supermodular-binary"]}\n'
    '{"id":1,"categories":["a",null]}\n'
  )
  assert read_stream(write_stream(stream)) == stream

def test_save_and_load_stream(tmp_path):
  stream = additive(
    Direction.CHORES, [(1, 2), (2, 3)], monotone=True, profile=('additive', 'additive'))
  path = tmp_path / 'instance.jsonl'
  save_stream(stream, path)
  assert load_stream(path) == stream

# --------------------------------------------------------------------------------------

def test_read_decisions():
  text = (
    '{"decision":"assign","agent":2}\n'
    '{"decision":"discard"}\n'
    '{"decision":"hold","release":1}\n'
    '{"decision":"assign","agent":1,"release":2}\n'
  )
  assert read_decisions(text) == (
    Decision.assign(2),
    Decision.discard(),
    Decision.hold(release=1),
    Decision.assign(1, release=2),
  )
  assert write_decisions(list(read_decisions(text))) == text

@pytest.mark.parametrize('text,message', [
  ('{"decision":"give","agent":1}', 'is not one of'),
  ('{"decision":"assign"}', 'agent'),
  ('{"decision":"assign","agent":0}', 'is not a positive agent index'),
  ('{"decision":"discard","agent":1}', 'has agent for discard'),
  ('{"decision":"hold","release":-1}', 'is not a positive agent index'),
  ('{"decision":"assign","agent":1,"reason":"x"}', 'unexpected field reason'),
])
def test_read_decisions_errors(text, message):
  with pytest.raises(ValidationError, match=message):
    read_decisions(text)

def test_chore_discards_are_rejected():
  assert read_decisions('{"decision":"discard"}', direction=Direction.GOODS)
  with pytest.raises(ValidationError, match='discards a chore'):
    read_decisions('{"decision":"discard"}', direction=Direction.CHORES)

def test_save_and_load_decisions(tmp_path):
  decisions = (Decision.assign(1), Decision.hold(), Decision.assign(2, release=1))
  path = tmp_path / 'decisions.jsonl'
  save_decisions(decisions, path)
  assert path.read_text(encoding='utf8').count('\n') == 3
  assert load_decisions(path) == decisions
