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
Reading and writing instance and decision files. Both are newline-delimited
JSON. An instance file starts with a header object fixing the direction, the
number of agents, and optionally the deadline, representation, declared
valuation classes, category universes, and monotone flag::

  {"direction":"goods","n":2,"classes":["bivalued(1/1,5/1)","bivalued(1/1,5/1)"]}
  {"id":1,"values":["1/1","5/1"]}
  {"id":2,"values":["5/1","5/1"]}

Each following line is one item, carrying either per-agent ``values`` or
per-agent ``categories``, with ``null`` for a loop. The ``id`` is optional but,
if present, must equal the item's position. A decision file holds one decision
object per line, such as ``{"decision":"assign","agent":1}``.

Explicit set-function instances have no file format; they only exist in code.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional, Union

from fairstream.core import Decision, DecisionKind, Direction, Item, Representation, Stream
from fairstream.error import ValidationError
from fairstream.serde import dumps_line, read_lines
from fairstream.validator import Validator
from fairstream.valuations import ValuationClass

__all__ = [
  'ingest_header',
  'ingest_item',
  'ingest_decision',
  'read_stream',
  'load_stream',
  'write_stream',
  'save_stream',
  'read_decisions',
  'load_decisions',
  'write_decisions',
  'save_decisions',
]

_HEADER_KEYS: set[str] = {
  'direction', 'n', 'deadline', 'representation', 'classes', 'class', 'monotone',
  'universes',
}

_FILE_REPRESENTATIONS = (Representation.ADDITIVE, Representation.MATROID)

def _ingest_class(entry: Validator[Any]) -> str:
  try:
    return str(ValuationClass.parse(entry.to_string().value))
  except ValidationError as x:
    entry.raise_invalid(str(x))

def ingest_header(data: Validator[Any]) -> dict[str, Any]:
  """
  Ingest an instance or session header. The result maps :py:class:`Stream`
  field names to validated values. A single ``class`` applies to all agents
  and is an alternative to per-agent ``classes``.
  """
  header = data.to_object(valid_keys=_HEADER_KEYS)
  fields: dict[str, Any] = { 'direction': header['direction'].to_enum(Direction) }
  n = header['n'].to_integer().value
  if n < 1:
    header['n'].raise_invalid('is not a positive agent count')
  fields['n'] = n

  deadline = header.optional('deadline')
  if deadline is not None:
    fields['deadline'] = deadline.to_integer().value
    if fields['deadline'] not in (0, 1):
      deadline.raise_invalid('is neither 0 nor 1')
  representation = header.optional('representation')
  if representation is not None:
    fields['representation'] = representation.to_enum(Representation, _FILE_REPRESENTATIONS)
  monotone = header.optional('monotone')
  if monotone is not None:
    fields['monotone'] = monotone.to_boolean().value

  if header.has('classes') and header.has('class'):
    header.raise_invalid('has both class and classes')
  classes = header.optional('classes')
  if classes is not None:
    profile = tuple(_ingest_class(entry) for entry in classes.to_list().items())
    if len(profile) != n:
      classes.raise_invalid(f'has {len(profile)} entries for {n} agents')
    fields['profile'] = profile
  elif header.has('class'):
    fields['profile'] = (_ingest_class(header['class']),) * n

  universes = header.optional('universes')
  if universes is not None:
    fields['universes'] = tuple(
      tuple(label.to_string().value for label in universe.to_list(allow_empty=True).items())
      for universe in universes.to_list().items()
    )
  return fields

_ITEM_KEYS: set[str] = { 'id', 'values', 'categories' }

def ingest_item(
  data: Validator[Any], ordinal: int, representation: Representation
) -> Item:
  """
  Ingest one item row. Row lengths and universes are checked when the stream
  is assembled.
  """
  item = data.to_object(valid_keys=_ITEM_KEYS)
  id = item.optional('id')
  if id is not None and id.to_integer().value != ordinal:
    id.raise_invalid(f'is {id.value} for item in position {ordinal}')

  if representation is Representation.ADDITIVE:
    if item.has('categories'):
      item.raise_invalid('has categories in an additive instance')
    return Item(ordinal, values=item['values'].to_row())
  if item.has('values'):
    item.raise_invalid('has values in a matroid instance')
  return Item(ordinal, categories=item['categories'].to_labels())

_DECISION_KEYS: set[str] = { 'decision', 'agent', 'release' }

def ingest_decision(data: Validator[Any], direction: Optional[Direction] = None) -> Decision:
  """
  Ingest one decision. If the direction is known, discarding chores is
  rejected right away.
  """
  decision = data.to_object(valid_keys=_DECISION_KEYS)
  kind = decision['decision'].to_enum(DecisionKind)
  if kind is DecisionKind.DISCARD and direction is Direction.CHORES:
    decision['decision'].raise_invalid('discards a chore')

  agent = None
  if kind is DecisionKind.ASSIGN:
    agent = decision['agent'].to_agent()
  elif decision.has('agent'):
    decision.raise_invalid(f'has agent for {kind.value}')

  release = decision.optional('release')
  return Decision(kind, agent, None if release is None else release.to_agent())

# --------------------------------------------------------------------------------------

def read_stream(text: str, filename: str = '<instance>') -> Stream:
  """
  Read an instance from JSONL text.

  :raises ValidationError: indicates a malformed header or item, or a stream
    violating the model's invariants.
  """
  lines = iter(read_lines(text))
  try:
    number, header_data = next(lines)
  except StopIteration:
    raise ValidationError(f'{filename} has no header') from None

  fields = ingest_header(Validator(header_data, filename=f'{filename}:{number}'))
  representation = fields.get('representation', Representation.ADDITIVE)
  items = []
  for ordinal, (number, item_data) in enumerate(lines, start=1):
    items.append(ingest_item(
      Validator(item_data, filename=f'{filename}:{number}'), ordinal, representation))

  try:
    return Stream(items=tuple(items), **fields)
  except ValidationError as x:
    raise ValidationError(f'{filename}: {x}') from x

def load_stream(path: Union[str, Path]) -> Stream:
  """Load an instance file."""
  with open(path, mode='r', encoding='utf8') as file:
    return read_stream(file.read(), str(path))

def write_stream(stream: Stream) -> str:
  """Write the stream as JSONL text."""
  header: dict[str, Any] = { 'direction': stream.direction, 'n': stream.n }
  if stream.deadline:
    header['deadline'] = stream.deadline
  if stream.representation is not Representation.ADDITIVE:
    header['representation'] = stream.representation
  header['classes'] = stream.profile
  if stream.monotone:
    header['monotone'] = True
  header['universes'] = stream.universes
  return dumps_line(header) + ''.join(dumps_line(item.to_dict()) for item in stream.items)

def save_stream(stream: Stream, path: Union[str, Path]) -> None:
  with open(path, mode='w', encoding='utf8') as file:
    file.write(write_stream(stream))

def read_decisions(
  text: str, filename: str = '<decisions>', direction: Optional[Direction] = None
) -> tuple[Decision, ...]:
  """
  Read decisions from JSONL text.

  :raises ValidationError: indicates a malformed decision.
  """
  return tuple(
    ingest_decision(Validator(data, filename=f'{filename}:{number}'), direction)
    for number, data in read_lines(text)
  )

def load_decisions(
  path: Union[str, Path], direction: Optional[Direction] = None
) -> tuple[Decision, ...]:
  """Load a decision file."""
  with open(path, mode='r', encoding='utf8') as file:
    return read_decisions(file.read(), str(path), direction)

def write_decisions(decisions: Union[list[Decision], tuple[Decision, ...]]) -> str:
  return ''.join(dumps_line(d.to_dict()) for d in decisions)

def save_decisions(
  decisions: Union[list[Decision], tuple[Decision, ...]], path: Union[str, Path]
) -> None:
  with open(path, mode='w', encoding='utf8') as file:
    file.write(write_decisions(decisions))
