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
Validation of parsed JSON for instance headers, item rows, decisions, protocol
messages, and adversary case trees. A :py:class:`Validator` wraps a value
together with its position in the document. Navigating with
:py:meth:`Validator.__getitem__`, :py:meth:`Validator.optional`, and
:py:meth:`Validator.items` extends the position, and the coercions either
return the checked value or raise a :py:class:`ValidationError` whose message
starts with the filename and key path, e.g.,
``stream.jsonl:3.values[1] is not an exact rational "p/q"``.
"""

from __future__ import annotations

import enum
import json
from fractions import Fraction
from typing import (
  Any, cast, Collection, Generic, Iterator, Mapping, NoReturn, Optional, TypeVar, Union
)

from fairstream.error import ValidationError
from fairstream.serde import parse_rational, RationalT

__all__ = ['Validator']

KeyType = Union[int, str]
ObjectType = Mapping[str, object]

T = TypeVar('T')
E = TypeVar('E', bound=enum.Enum)


class Validator(Generic[T]):
  """
  A value within a JSON document. The root validator takes the document's
  filename, which for JSONL files conventionally includes the line number,
  e.g., ``stream.jsonl:3``. Nested validators take their key and parent, with
  ``parent.value[key] == value``.
  """
  def __init__(
    self,
    value: T,
    *,
    filename: str = '',
    key: Optional[KeyType] = None,
    parent: Optional[Validator[Any]] = None,
  ) -> None:
    self._filename: str = parent._filename if parent is not None else filename
    self._key: Optional[KeyType] = key
    self._value: T = value
    self._parent: Optional[Validator[Any]] = parent

  @property
  def filename(self) -> str:
    return self._filename

  @property
  def keypath(self) -> str:
    """
    The path from the document root to this value, with list indices written
    as ``[1]`` and fields as ``.values`` or, for keys that are not Python
    identifiers such as the branches of a case tree, as ``["1"]``.
    """
    path: list[str] = []
    current: Optional[Validator[Any]] = self
    while current is not None and current._parent is not None:
      key = current._key
      path.append(
        f'.{key}' if isinstance(key, str) and key.isidentifier() else f'[{json.dumps(key)}]')
      current = current._parent
    return ''.join(reversed(path))

  @property
  def value(self) -> T:
    return self._value

  def raise_invalid(self, message: str) -> NoReturn:
    """
    Raise a validation error for this value, prefixing the message with filename
    and key path.

    :raises ValidationError: always.
    """
    raise ValidationError(f'{self._filename}{self.keypath} {message}')

  # ------------------------------------------------------------------------------------
  # Scalars

  def to_integer(self) -> Validator[int]:
    """Check for an integer. Booleans are not integers."""
    if isinstance(self._value, bool) or not isinstance(self._value, int):
      self.raise_invalid('is not an integer')
    return cast(Validator[int], self)

  def to_agent(self) -> int:
    """Check for a 1-based agent index and return it."""
    agent = self.to_integer().value
    if agent < 1:
      self.raise_invalid('is not a positive agent index')
    return agent

  def to_boolean(self) -> Validator[bool]:
    if not isinstance(self._value, bool):
      self.raise_invalid('is not a boolean')
    return cast(Validator[bool], self)

  def to_string(self) -> Validator[str]:
    if not isinstance(self._value, str):
      self.raise_invalid('is not a string')
    return cast(Validator[str], self)

  def to_label(self) -> Optional[str]:
    """Check for a category label, with ``null`` standing for a loop."""
    if self._value is not None and not isinstance(self._value, str):
      self.raise_invalid('is neither a string nor null')
    return cast(Optional[str], self._value)

  def to_rational(self) -> RationalT:
    """
    Parse an exact rational from a ``"p/q"`` string, a ``"p"`` string, an
    integer, or ``"inf"``.
    """
    try:
      return parse_rational(self._value)
    except ValidationError:
      self.raise_invalid('is not an exact rational "p/q"')

  def to_finite(self) -> Fraction:
    """Parse a finite exact rational."""
    value = self.to_rational()
    if not isinstance(value, Fraction):
      self.raise_invalid('is not finite')
    return value

  def to_enum(self, kind: type[E], choices: Optional[Collection[E]] = None) -> E:
    """
    Parse a member of the enumeration from its value, optionally restricted to
    the given members.
    """
    members = list(kind) if choices is None else list(choices)
    text = self.to_string().value
    for member in members:
      if member.value == text:
        return member
    self.raise_invalid(f'is not one of {", ".join(sorted(str(m.value) for m in members))}')

  # ------------------------------------------------------------------------------------
  # Lists

  def to_list(self, *, allow_empty: bool = False) -> Validator[list[object]]:
    if not isinstance(self._value, list):
      self.raise_invalid('is not a list')
    if not allow_empty and not self._value:
      self.raise_invalid('is the empty list')
    return cast(Validator[list[object]], self)

  def items(self) -> Iterator[Validator[object]]:
    """Iterate over the validators for the items of this list value."""
    assert isinstance(self._value, list)
    for index, item in enumerate(self._value):
      yield Validator(item, key=index, parent=self)

  def to_row(self, width: Optional[int] = None) -> tuple[Fraction, ...]:
    """Parse a non-empty row of finite rationals, optionally of the given width."""
    entries = self.to_list()
    if width is not None and len(entries.value) != width:
      entries.raise_invalid(f'has {len(entries.value)} entries for {width} agents')
    return tuple(entry.to_finite() for entry in entries.items())

  def to_labels(self, width: Optional[int] = None) -> tuple[Optional[str], ...]:
    """Parse a non-empty row of category labels, optionally of the given width."""
    entries = self.to_list()
    if width is not None and len(entries.value) != width:
      entries.raise_invalid(f'has {len(entries.value)} entries for {width} agents')
    return tuple(entry.to_label() for entry in entries.items())

  # ------------------------------------------------------------------------------------
  # Objects

  def to_object(self, valid_keys: Optional[Collection[str]] = None) -> Validator[ObjectType]:
    """Check for an object, optionally without fields outside ``valid_keys``."""
    if not isinstance(self._value, dict):
      self.raise_invalid('is not an object')
    if valid_keys is not None:
      for key in self._value:
        if key not in valid_keys:
          self.raise_invalid(f'contains unexpected field {key}')
    return cast(Validator[ObjectType], self)

  def has(self, key: str) -> bool:
    return isinstance(self._value, dict) and key in self._value

  def optional(self, key: str) -> Optional[Validator[object]]:
    """Get the validator for an optional field or ``None`` if it is missing."""
    return self[key] if self.has(key) else None

  def __getitem__(self, key: KeyType) -> Validator[object]:
    """
    Get the validator for a list item or a required object field.

    :raises ValidationError: indicates a missing field.
    :raises TypeError: indicates a scalar value or a key of the wrong type.
    :raises IndexError: indicates an out of bounds list index.
    """
    value = self._value
    if isinstance(value, list):
      if not isinstance(key, int):
        raise TypeError(f'non-integer key "{key}" cannot index list')
      if not 0 <= key < len(value):
        raise IndexError(f'list index {key} is out of bounds for length {len(value)}')
      return Validator(value[key], key=key, parent=self)
    if isinstance(value, dict):
      if not isinstance(key, str):
        raise TypeError(f'non-string key "{key}" cannot index object')
      if key not in value:
        self.raise_invalid(f'is missing required field {key}')
      return Validator(value[key], key=key, parent=self)
    raise TypeError(f'scalar value "{value}" cannot be indexed')
