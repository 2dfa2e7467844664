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
JSON serialization and deserialization. All values in *fairstream* are exact
rationals, which JSON cannot represent natively. This module therefore writes
rationals as ``"p/q"`` strings, always including the denominator, and infinity
as ``"inf"``. Its :py:func:`loads` and :py:func:`dumps` functions leave most of
the heavy lifting to the corresponding functions in Python's builtin ``json``
module. They simply pass keyword arguments through. The :py:func:`prepare`
function encapsulates the added functionality.
"""

import dataclasses
import enum
import json
import math
import re

from fractions import Fraction
from typing import Any, Iterator, Mapping, Union

from fairstream.error import ValidationError

__all__ = [
  'format_rational',
  'parse_rational',
  'loads',
  'prepare',
  'dumps',
  'dumps_line',
  'read_lines',
]

JsonT = Union[None, bool, int, float, str, list[Any], Mapping[str, object]]
RationalT = Union[Fraction, float]

_RATIONAL = re.compile(r'^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$')

def format_rational(value: Union[int, RationalT]) -> str:
  """
  Format the given rational as ``"p/q"``. Integers are written with an explicit
  denominator of one, so that ten becomes ``"10/1"``. Positive infinity, the
  only floating point value the package ever produces, becomes ``"inf"``.
  """
  if isinstance(value, float):
    if value == math.inf:
      return 'inf'
    raise ValueError(f'refusing to format inexact value {value!r}')
  value = Fraction(value)
  return f'{value.numerator}/{value.denominator}'

def parse_rational(value: object) -> RationalT:
  """
  Parse a rational from a ``"p/q"`` or ``"p"`` string, an integer, or the
  string ``"inf"``. Decimal strings and floats are rejected since they cannot
  be trusted to be exact.

  :raises ValidationError: indicates a value that is not an exact rational.
  """
  if isinstance(value, bool):
    raise ValidationError(f'{value!r} is not a rational')
  if isinstance(value, int):
    return Fraction(value)
  if isinstance(value, str):
    if value.strip() == 'inf':
      return math.inf
    match = _RATIONAL.match(value)
    if match is not None:
      numerator, denominator = match.group(1), match.group(2)
      if denominator is not None and int(denominator) == 0:
        raise ValidationError(f'"{value}" has a zero denominator')
      return Fraction(int(numerator), int(denominator or 1))
  raise ValidationError(f'{value!r} is not a rational')

def loads(data: Union[str, bytes], **kwargs: Any) -> JsonT:
  """
  Return the result of deserializing a value from the given JSON text. This
  function simply wraps an invocation of the eponymous function in Python's
  ``json`` package. It passes the keyword arguments through.
  """
  return json.loads(data, **kwargs)

_EMPTY_LIST: list[Any] = []
_EMPTY_TUPLE: tuple[Any, ...] = ()

def _is_void(value: Any) -> bool:
  return value is None or value == _EMPTY_LIST or value == _EMPTY_TUPLE

def prepare(data: Any) -> Any:
  """
  Prepare the given value for serialization to JSON. This function recursively
  replaces enumeration constants with their values, rationals and infinity with
  their ``"p/q"`` strings, sets with sorted lists, lists and tuples with
  equivalent lists, and dataclasses and dictionaries with equivalent
  dictionaries. While generating equivalent dictionaries, it also filters out
  entries that are ``None``, the empty list ``[]``, or the empty tuple ``()``.
  All other values remain unchanged.
  """
  if dataclasses.is_dataclass(data) and not isinstance(data, type):
    to_dict = getattr(data, 'to_dict', None)
    if callable(to_dict):
      return prepare(to_dict())
    result = {}
    for field in dataclasses.fields(data):
      value = getattr(data, field.name)
      if not _is_void(value):
        result[field.name] = prepare(value)
    return result
  elif isinstance(data, dict):
    return { k: prepare(v) for k, v in data.items() if not _is_void(v) }
  elif isinstance(data, (list, tuple)):
    return [prepare(v) for v in data]
  elif isinstance(data, (set, frozenset)):
    return [prepare(v) for v in sorted(data)]
  elif isinstance(data, enum.Enum):
    return data.value
  elif isinstance(data, bool):
    return data
  elif isinstance(data, Fraction):
    return format_rational(data)
  elif isinstance(data, float) and data == math.inf:
    return 'inf'
  else:
    return data

def dumps(data: Any, **kwargs: Any) -> str:
  """
  Return the result of serializing the given value as JSON text. This function
  simply wraps an invocation of the eponymous function in Python's ``json``
  package, after applying :py:func:`prepare` to the given ``data``. It passes
  the keyword arguments through.
  """
  return json.dumps(prepare(data), **kwargs)

def dumps_line(data: Any) -> str:
  """Serialize the given value as one compact line of JSON, newline included."""
  return json.dumps(prepare(data), separators=(',', ':'), ensure_ascii=False) + '\n'

def read_lines(text: str) -> Iterator[tuple[int, JsonT]]:
  """
  Parse newline-delimited JSON. This function yields pairs of 1-based line
  number and parsed value, skipping blank lines.

  :raises ValidationError: indicates a line that is not valid JSON.
  """
  for number, line in enumerate(text.splitlines(), start=1):
    if not line.strip():
      continue
    try:
      yield number, json.loads(line)
    except json.JSONDecodeError as x:
      raise ValidationError(f'line {number} is not valid JSON: {x.msg}') from x
