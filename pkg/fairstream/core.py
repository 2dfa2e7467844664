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
The domain model shared by all other modules. A :py:class:`Stream` is an
ordered sequence of :py:class:`Item` instances that are either all goods or all
chores, as captured by :py:class:`Direction`. Each item reveals one row with an
entry per agent, either an additive value/cost or a category label for matroid
valuations. An online allocator answers every arriving item with a
:py:class:`Decision`, and :py:func:`apply_decision` folds decisions into an
:py:class:`Allocation`.

Agents are numbered 1 through n and items are numbered by arrival, starting
with 1. All numbers are exact :py:class:`fractions.Fraction` instances. The
only inexact value is ``math.inf``, which stands for an unbounded ratio.

All model classes are frozen dataclasses and hence immutable. An allocation
"evolves" by :py:func:`apply_decision` returning its successor.
"""

from __future__ import annotations

import dataclasses
import enum
import math

from fractions import Fraction
from typing import Any, Iterator, Optional, Union

from fairstream.error import IllegalDecision, OutOfRange, ValidationError

__all__ = [
  'INFINITY',
  'Ratio',
  'Direction',
  'Representation',
  'Item',
  'Stream',
  'DecisionKind',
  'Decision',
  'Allocation',
  'agents',
  'apply_decision',
  'flush_held',
  'prefix_items',
  'is_monotone',
]

INFINITY: float = math.inf

Ratio = Union[Fraction, float]
"""A ratio is an exact rational or, for unbounded chores ratios, infinity."""

def agents(n: int) -> range:
  """Get the range of agent indices 1, ..., n."""
  return range(1, n + 1)

# --------------------------------------------------------------------------------------

class Direction(enum.Enum):
  """Whether a stream consists of goods or of chores."""
  GOODS = 'goods'
  CHORES = 'chores'

  @property
  def is_goods(self) -> bool:
    return self is Direction.GOODS


class Representation(enum.Enum):
  """
  How items reveal their valuations. Additive items carry one value or cost
  per agent, matroid items one category per agent. Explicit items carry no
  row; their valuations come from a set-function table held by the oracle.
  """
  ADDITIVE = 'additive'
  MATROID = 'matroid'
  EXPLICIT = 'explicit'


@dataclasses.dataclass(frozen=True)
class Item:
  """An arriving item."""

  id: int
  """The arrival ordinal, starting with 1."""

  values: Optional[tuple[Fraction, ...]] = None
  """For additive items, the per-agent values or costs."""

  categories: Optional[tuple[Optional[str], ...]] = None
  """
  For matroid items, the per-agent category labels. ``None`` marks a loop, an
  item that never increases the agent's rank.
  """

  @property
  def width(self) -> Optional[int]:
    """The length of the revealed row or ``None`` for explicit items."""
    if self.values is not None:
      return len(self.values)
    if self.categories is not None:
      return len(self.categories)
    return None

  def value(self, agent: int) -> Fraction:
    """Get the given agent's additive value or cost."""
    assert self.values is not None
    return self.values[agent - 1]

  def category(self, agent: int) -> Optional[str]:
    """Get the given agent's category label."""
    assert self.categories is not None
    return self.categories[agent - 1]

  def to_dict(self) -> dict[str, Any]:
    result: dict[str, Any] = { 'id': self.id }
    if self.values is not None:
      result['values'] = list(self.values)
    if self.categories is not None:
      result['categories'] = list(self.categories)
    return result

  def __str__(self) -> str:
    if self.values is not None:
      row = ', '.join(str(v) for v in self.values)
    elif self.categories is not None:
      row = ', '.join('-' if c is None else c for c in self.categories)
    else:
      row = ''
    return f'e{self.id}({row})'


@dataclasses.dataclass(frozen=True)
class Stream:
  """
  An online instance. The constructor validates the stream and raises a
  :py:class:`fairstream.error.ValidationError` if items are out of order, rows
  have the wrong length or kind, values are negative, or categories fall
  outside declared universes.
  """

  direction: Direction
  """Goods or chores."""

  n: int
  """The number of agents."""

  items: tuple[Item, ...]
  """The items in arrival order."""

  representation: Representation = Representation.ADDITIVE
  """The representation shared by all items."""

  deadline: int = 0
  """Zero for immediate decisions, one if an item may wait one round."""

  profile: tuple[str, ...] = ()
  """The declared per-agent valuation classes, in textual form, if any."""

  monotone: bool = False
  """Whether the instance is declared monotone."""

  universes: tuple[tuple[str, ...], ...] = ()
  """The declared per-agent category universes, if any."""

  def __post_init__(self) -> None:
    if self.n < 1:
      raise ValidationError(f'stream has {self.n} agents')
    if self.deadline not in (0, 1):
      raise ValidationError(f'stream has unsupported deadline {self.deadline}')
    if self.profile and len(self.profile) != self.n:
      raise ValidationError(
        f'stream declares {len(self.profile)} classes for {self.n} agents')
    if self.universes and len(self.universes) != self.n:
      raise ValidationError(
        f'stream declares {len(self.universes)} universes for {self.n} agents')

    for index, item in enumerate(self.items, start=1):
      if item.id != index:
        raise ValidationError(f'item e{item.id} arrives in position {index}')
      if self.representation is Representation.ADDITIVE:
        if item.values is None or item.categories is not None:
          raise ValidationError(f'item e{item.id} is not additive')
        if any(v < 0 for v in item.values):
          raise ValidationError(f'item e{item.id} has a negative entry')
      elif self.representation is Representation.MATROID:
        if item.categories is None or item.values is not None:
          raise ValidationError(f'item e{item.id} has no categories')
        if self.universes:
          for agent, label in enumerate(item.categories, start=1):
            if label is not None and label not in self.universes[agent - 1]:
              raise ValidationError(
                f'item e{item.id} has category "{label}" outside the universe '
                f'of agent {agent}'
              )
      else:
        if item.width is not None:
          raise ValidationError(f'explicit item e{item.id} reveals a row')
      if item.width is not None and item.width != self.n:
        raise ValidationError(
          f'item e{item.id} has {item.width} entries for {self.n} agents')

  @property
  def length(self) -> int:
    """The number of items t."""
    return len(self.items)

  def __iter__(self) -> Iterator[Item]:
    return iter(self.items)

  def prefix(self, k: int) -> Stream:
    """Get the stream truncated to its first k items."""
    return dataclasses.replace(self, items=self.items[:k])

  def column(self, agent: int) -> tuple[Fraction, ...]:
    """Get the given agent's additive values or costs in arrival order."""
    return tuple(item.value(agent) for item in self.items)

# --------------------------------------------------------------------------------------

class DecisionKind(enum.Enum):
  ASSIGN = 'assign'
  DISCARD = 'discard'
  HOLD = 'hold'


@dataclasses.dataclass(frozen=True)
class Decision:
  """
  An allocator's irrevocable answer to an arriving item. If an item is being
  held from the previous round, the decision must also name the agent that
  receives the held item through ``release``.
  """

  kind: DecisionKind
  """Assign, discard, or hold the arriving item."""

  agent: Optional[int] = None
  """For assignments, the receiving agent."""

  release: Optional[int] = None
  """The agent receiving the previously held item, if any."""

  @classmethod
  def assign(cls, agent: int, release: Optional[int] = None) -> Decision:
    return cls(DecisionKind.ASSIGN, agent, release)

  @classmethod
  def discard(cls, release: Optional[int] = None) -> Decision:
    return cls(DecisionKind.DISCARD, None, release)

  @classmethod
  def hold(cls, release: Optional[int] = None) -> Decision:
    return cls(DecisionKind.HOLD, None, release)

  @property
  def is_assign(self) -> bool:
    return self.kind is DecisionKind.ASSIGN

  def to_dict(self) -> dict[str, Any]:
    result: dict[str, Any] = { 'decision': self.kind.value }
    if self.agent is not None:
      result['agent'] = self.agent
    if self.release is not None:
      result['release'] = self.release
    return result

  @classmethod
  def from_dict(cls, data: dict[str, Any]) -> Decision:
    """
    Create a new decision from deserialized JSON text. This method does not
    validate its input; see :py:mod:`fairstream.ingest` for that.
    """
    return cls(DecisionKind(data['decision']), data.get('agent'), data.get('release'))

  def __str__(self) -> str:
    suffix = f', release={self.release}' if self.release is not None else ''
    if self.kind is DecisionKind.ASSIGN:
      return f'Assign({self.agent}{suffix})'
    name = self.kind.value.capitalize()
    return f'{name}({suffix[2:]})' if suffix else name


@dataclasses.dataclass(frozen=True)
class Allocation:
  """
  A prefix allocation. Bundles, discarded items, and the held item are
  pairwise disjoint and together cover exactly the first ``round`` items.
  """

  bundles: tuple[frozenset[int], ...]
  """The agents' bundles, with agent i's bundle at index i - 1."""

  discarded: frozenset[int] = frozenset()
  """The discarded goods."""

  held: Optional[int] = None
  """The item waiting in the hold buffer, if any."""

  round: int = 0
  """The number of items processed so far."""

  direction: Direction = Direction.GOODS
  deadline: int = 0

  @classmethod
  def empty(
    cls, n: int, direction: Direction = Direction.GOODS, deadline: int = 0
  ) -> Allocation:
    return cls(tuple(frozenset() for _ in range(n)), direction=direction, deadline=deadline)

  @classmethod
  def for_stream(cls, stream: Stream) -> Allocation:
    return cls.empty(stream.n, stream.direction, stream.deadline)

  @classmethod
  def of(
    cls,
    *bundles: Any,
    direction: Direction = Direction.GOODS,
    discarded: Any = (),
  ) -> Allocation:
    """
    Create an allocation from item id collections, one per agent. The round is
    the largest mentioned item id, so the bundles and discards must cover a
    prefix. This factory is meant for tests and interactive use.
    """
    frozen = tuple(frozenset(b) for b in bundles)
    gone = frozenset(discarded)
    everything = frozenset().union(*frozen, gone)
    return cls(frozen, gone, None, max(everything, default=0), direction)

  @property
  def n(self) -> int:
    return len(self.bundles)

  def bundle(self, agent: int) -> frozenset[int]:
    """Get the given agent's bundle."""
    return self.bundles[agent - 1]

  def owner(self, item: int) -> Optional[int]:
    """Get the agent holding the given item, if any."""
    for agent, bundle in enumerate(self.bundles, start=1):
      if item in bundle:
        return agent
    return None

  @property
  def assigned(self) -> frozenset[int]:
    return frozenset().union(*self.bundles)

  def with_item(self, agent: int, item: int) -> Allocation:
    """Get a copy with the item added to the agent's bundle."""
    bundles = list(self.bundles)
    bundles[agent - 1] = bundles[agent - 1] | {item}
    return dataclasses.replace(self, bundles=tuple(bundles))

  def to_dict(self) -> dict[str, Any]:
    result: dict[str, Any] = {
      'round': self.round,
      'bundles': [sorted(b) for b in self.bundles],
    }
    if self.discarded:
      result['discarded'] = sorted(self.discarded)
    if self.held is not None:
      result['held'] = self.held
    return result

  def __str__(self) -> str:
    def fmt(items: frozenset[int]) -> str:
      return '{' + ','.join(f'e{i}' for i in sorted(items)) + '}'
    parts = [f'A{i}={fmt(b)}' for i, b in enumerate(self.bundles, start=1)]
    if self.discarded:
      parts.append(f'A0={fmt(self.discarded)}')
    if self.held is not None:
      parts.append(f'held=e{self.held}')
    return ' '.join(parts)

# --------------------------------------------------------------------------------------

def _check_agent(alloc: Allocation, agent: Optional[int], role: str) -> int:
  if agent is None or not 1 <= agent <= alloc.n:
    raise IllegalDecision(f'{role} {agent} is not in 1..{alloc.n}')
  return agent

def apply_decision(alloc: Allocation, item: Item, decision: Decision) -> Allocation:
  """
  Apply the decision for the given item and return the successor allocation.
  If an item is being held, the decision's ``release`` names its recipient,
  and the held item moves into that bundle before the new item is processed.

  :raises IllegalDecision: indicates that the item is not the next one, that a
    held item is not released or a release names no held item, that an
    assignment is out of range, that a chore is discarded, or that a hold
    happens without deadline or with a full buffer.
  """
  if item.id != alloc.round + 1:
    raise IllegalDecision(f'item e{item.id} arrives after round {alloc.round}')

  current = alloc
  if alloc.held is not None:
    if decision.release is None:
      if decision.kind is DecisionKind.HOLD:
        raise IllegalDecision(f'hold buffer is full with e{alloc.held}')
      raise IllegalDecision(f'held item e{alloc.held} is not released')
    agent = _check_agent(alloc, decision.release, 'release agent')
    current = dataclasses.replace(alloc.with_item(agent, alloc.held), held=None)
  elif decision.release is not None:
    raise IllegalDecision('release without a held item')

  if decision.kind is DecisionKind.ASSIGN:
    agent = _check_agent(current, decision.agent, 'agent')
    current = current.with_item(agent, item.id)
  elif decision.kind is DecisionKind.DISCARD:
    if current.direction is Direction.CHORES:
      raise IllegalDecision(f'chore e{item.id} cannot be discarded')
    current = dataclasses.replace(current, discarded=current.discarded | {item.id})
  else:
    if current.deadline != 1:
      raise IllegalDecision(f'item e{item.id} cannot be held without deadline')
    current = dataclasses.replace(current, held=item.id)

  return dataclasses.replace(current, round=alloc.round + 1)

def flush_held(alloc: Allocation, agent: int) -> Allocation:
  """
  Assign the held item at the end of the stream. The round does not change.

  :raises IllegalDecision: indicates that no item is held or that the agent is
    out of range.
  """
  if alloc.held is None:
    raise IllegalDecision('no item is held')
  _check_agent(alloc, agent, 'agent')
  return dataclasses.replace(alloc.with_item(agent, alloc.held), held=None)

def prefix_items(stream: Stream, k: int) -> frozenset[int]:
  """
  Get the ids of the items that have arrived by round k.

  :raises OutOfRange: indicates that k is negative or exceeds the stream length.
  """
  if not 0 <= k <= stream.length:
    raise OutOfRange(f'round {k} is outside 0..{stream.length}')
  return frozenset(item.id for item in stream.items[:k])

def is_monotone(stream: Stream) -> bool:
  """
  Determine whether every agent's additive sequence is entirely non-decreasing
  or entirely non-increasing. Non-additive streams are never monotone.
  """
  if stream.representation is not Representation.ADDITIVE:
    return False
  for agent in agents(stream.n):
    column = stream.column(agent)
    pairs = list(zip(column, column[1:]))
    if not (all(x <= y for x, y in pairs) or all(x >= y for x, y in pairs)):
      return False
  return True
