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
Valuation and cost oracles. An :py:class:`Oracle` evaluates any agent's value
or cost of any set of arrived items. There are four realizations:

* :py:class:`AdditiveTable` sums per-item weights.
* :py:class:`PartitionMatroidRank` counts the distinct categories in a set,
  which is the rank function of a partition matroid and hence a submodular
  binary valuation.
* :py:class:`SupermodularComplementCost` is the set size minus that rank,
  which is a supermodular binary cost.
* :py:class:`ExplicitSetFunction` wraps an arbitrary set function.

Oracles are immutable and safe to share between threads. The module also
defines :py:class:`ValuationClass`, the admissible classes named by the
allocation algorithms, and :py:func:`classify`, which determines the tightest
class for an agent.
"""

from __future__ import annotations

import abc
import dataclasses
import enum
import re

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from fairstream.core import Direction, Item, Representation, Stream
from fairstream.error import UnknownItem, ValidationError
from fairstream.serde import format_rational, parse_rational

__all__ = [
  'ValuationKind',
  'ValuationClass',
  'Oracle',
  'AdditiveTable',
  'PartitionMatroidRank',
  'SupermodularComplementCost',
  'ExplicitSetFunction',
  'oracle_for',
  'oracle_for_stream',
  'set_value',
  'marginal',
  'classify',
]

# --------------------------------------------------------------------------------------
# Valuation Classes

class ValuationKind(enum.Enum):
  BINARY = 'binary'
  BIVALUED = 'bivalued'
  TRIVALUED = 'trivalued'
  GENERAL_ADDITIVE = 'additive'
  SUBMODULAR_BINARY = 'submodular-binary'
  SUPERMODULAR_BINARY = 'supermodular-binary'
  SET_FUNCTION = 'set-function'


_ARITY = {
  ValuationKind.BIVALUED: 2,
  ValuationKind.TRIVALUED: 3,
}

_CLASS_SYNTAX = re.compile(r'^\s*([a-z-]+)\s*(?:\((.*)\))?\s*$')


@dataclasses.dataclass(frozen=True)
class ValuationClass:
  """
  A valuation or cost class. Bi-valued classes carry their levels a and b,
  tri-valued classes also z, with 0 < a <= b <= z. A bi-valued or tri-valued
  class without levels only records the kind; algorithms that depend on the
  levels reject it.
  """

  kind: ValuationKind
  levels: tuple[Fraction, ...] = ()

  def __post_init__(self) -> None:
    arity = _ARITY.get(self.kind, 0)
    if self.levels and len(self.levels) != arity:
      raise ValidationError(f'{self.kind.value} takes {arity} levels, not {len(self.levels)}')
    if self.levels:
      if self.levels[0] <= 0:
        raise ValidationError(f'{self} has non-positive lowest level')
      if any(x > y for x, y in zip(self.levels, self.levels[1:])):
        raise ValidationError(f'{self} has levels out of order')

  @classmethod
  def binary(cls) -> ValuationClass:
    return cls(ValuationKind.BINARY)

  @classmethod
  def bivalued(cls, a: Fraction, b: Fraction) -> ValuationClass:
    return cls(ValuationKind.BIVALUED, (Fraction(a), Fraction(b)))

  @classmethod
  def trivalued(cls, a: Fraction, b: Fraction, z: Fraction) -> ValuationClass:
    return cls(ValuationKind.TRIVALUED, (Fraction(a), Fraction(b), Fraction(z)))

  @property
  def a(self) -> Fraction:
    return self.levels[0]

  @property
  def b(self) -> Fraction:
    return self.levels[1]

  @property
  def z(self) -> Fraction:
    return self.levels[2]

  @property
  def has_levels(self) -> bool:
    return len(self.levels) == _ARITY.get(self.kind, 0)

  @property
  def is_binary(self) -> bool:
    """Whether all values are 0 or 1. Bi-valued 1 and 1 counts as binary."""
    return self.kind is ValuationKind.BINARY or (
      self.kind is ValuationKind.BIVALUED and self.levels == (1, 1)
    )

  @property
  def is_bivalued(self) -> bool:
    return self.kind is ValuationKind.BIVALUED

  @property
  def is_additive(self) -> bool:
    return self.kind in (
      ValuationKind.BINARY, ValuationKind.BIVALUED,
      ValuationKind.TRIVALUED, ValuationKind.GENERAL_ADDITIVE,
    )

  def admits(self, value: Fraction) -> bool:
    """Determine whether an additive entry is consistent with this class."""
    if self.kind is ValuationKind.BINARY:
      return value in (0, 1)
    if self.kind in _ARITY:
      return value in self.levels if self.levels else value > 0
    return value >= 0

  def __str__(self) -> str:
    if not self.levels:
      return self.kind.value
    return f'{self.kind.value}({",".join(format_rational(l) for l in self.levels)})'

  @classmethod
  def parse(cls, text: str) -> ValuationClass:
    """
    Parse a class such as ``binary``, ``bivalued(1,5)``, ``trivalued(1/10,1,10)``,
    ``additive``, ``submodular-binary``, or ``supermodular-binary``.

    :raises ValidationError: indicates malformed text.
    """
    match = _CLASS_SYNTAX.match(text)
    if match is None:
      raise ValidationError(f'"{text}" is not a valuation class')
    try:
      kind = ValuationKind(match.group(1))
    except ValueError:
      raise ValidationError(f'"{match.group(1)}" is not a valuation class') from None
    arguments = match.group(2)
    if arguments is None or arguments.strip() == '':
      return cls(kind)
    levels = tuple(parse_rational(a.strip()) for a in arguments.split(','))
    if any(not isinstance(l, Fraction) for l in levels):
      raise ValidationError(f'"{text}" has an infinite level')
    return cls(kind, tuple(Fraction(l) for l in levels))

# --------------------------------------------------------------------------------------
# Oracles

class Oracle(abc.ABC):
  """
  The abstract valuation or cost oracle over a set of known items. Bundles are
  any iterables of item ids. Agents are numbered from 1.
  """
  def __init__(self, direction: Direction, n: int, items: Iterable[int]) -> None:
    self._direction = direction
    self._n = n
    self._items = frozenset(items)

  @property
  def direction(self) -> Direction:
    return self._direction

  @property
  def n(self) -> int:
    return self._n

  @property
  def items(self) -> frozenset[int]:
    """The ids of all items this oracle knows about."""
    return self._items

  @property
  def is_additive(self) -> bool:
    return False

  def _check(self, agent: int, bundle: Iterable[int]) -> frozenset[int]:
    if not 1 <= agent <= self._n:
      raise ValueError(f'agent {agent} is not in 1..{self._n}')
    bundle = frozenset(bundle)
    unknown = bundle - self._items
    if unknown:
      raise UnknownItem(f'oracle does not know item e{min(unknown)}')
    return bundle

  @abc.abstractmethod
  def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    ...

  def _marginal(self, agent: int, base: frozenset[int], item: int) -> Fraction:
    return self._value(agent, base | {item}) - self._value(agent, base)

  def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
    """
    Get the agent's value or cost for the bundle.

    :raises UnknownItem: indicates an item unknown to this oracle.
    """
    return self._value(agent, self._check(agent, bundle))

  def marginal(self, agent: int, base: Iterable[int], item: int) -> Fraction:
    """
    Get the agent's marginal value or cost for adding the item to the base.

    :raises UnknownItem: indicates an item unknown to this oracle.
    :raises ValueError: indicates that the item already is part of the base.
    """
    base = self._check(agent, base)
    self._check(agent, (item,))
    if item in base:
      raise ValueError(f'item e{item} already is part of the base')
    return self._marginal(agent, base, item)

  def singleton(self, agent: int, item: int) -> Fraction:
    """Get the agent's value or cost for the item on its own."""
    return self.marginal(agent, (), item)

  def gain(self, agent: int, base: frozenset[int], item: int) -> Fraction:
    """
    Get the marginal without validating agent, items, or membership. This
    method serves the inner loops of exhaustive enumeration.
    """
    return self._marginal(agent, base, item)

  def raw_value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    """Get the value or cost without validation."""
    return self._value(agent, bundle)

  @property
  def is_subadditive(self) -> bool:
    """Whether v(S ∪ T) <= v(S) + v(T) is guaranteed."""
    return False

  @abc.abstractmethod
  def valuation_class(self, agent: int) -> ValuationClass:
    ...


class AdditiveTable(Oracle):
  """An additive oracle backed by per-item weights."""
  def __init__(
    self, direction: Direction, n: int, weights: Mapping[int, Sequence[Fraction]]
  ) -> None:
    super().__init__(direction, n, weights.keys())
    self._weights = { item: tuple(Fraction(w) for w in row) for item, row in weights.items() }

  @property
  def is_additive(self) -> bool:
    return True

  @property
  def is_subadditive(self) -> bool:
    return True

  def weight(self, agent: int, item: int) -> Fraction:
    """Get the weight of a single known item."""
    try:
      return self._weights[item][agent - 1]
    except KeyError:
      raise UnknownItem(f'oracle does not know item e{item}') from None

  def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    return sum((self._weights[e][agent - 1] for e in bundle), Fraction(0))

  def _marginal(self, agent: int, base: frozenset[int], item: int) -> Fraction:
    return self._weights[item][agent - 1]

  def levels(self, agent: int) -> frozenset[Fraction]:
    return frozenset(row[agent - 1] for row in self._weights.values())

  def valuation_class(self, agent: int) -> ValuationClass:
    levels = self.levels(agent)
    if 0 in levels:
      if levels <= {0, 1}:
        return ValuationClass.binary()
      return ValuationClass(ValuationKind.GENERAL_ADDITIVE)
    if not levels:
      return ValuationClass.binary()
    ordered = sorted(levels)
    if len(ordered) <= 2:
      return ValuationClass.bivalued(ordered[0], ordered[-1])
    if len(ordered) == 3:
      return ValuationClass.trivalued(*ordered)
    return ValuationClass(ValuationKind.GENERAL_ADDITIVE)


class PartitionMatroidRank(Oracle):
  """
  The rank function of per-agent partition matroids. An agent's value of a set
  is the number of distinct categories among its items, i.e., the size of a
  largest subset with at most one item per category. A ``None`` category marks
  a loop, which never counts.
  """
  def __init__(
    self,
    n: int,
    categories: Mapping[int, Sequence[Optional[str]]],
    direction: Direction = Direction.GOODS,
  ) -> None:
    super().__init__(direction, n, categories.keys())
    self._categories = { item: tuple(row) for item, row in categories.items() }

  @property
  def is_subadditive(self) -> bool:
    return True

  def category(self, agent: int, item: int) -> Optional[str]:
    return self._categories[item][agent - 1]

  def rank(self, agent: int, bundle: Iterable[int]) -> int:
    bundle = self._check(agent, bundle)
    return self._rank(agent, bundle)

  def _rank(self, agent: int, bundle: frozenset[int]) -> int:
    labels = { self._categories[e][agent - 1] for e in bundle }
    labels.discard(None)
    return len(labels)

  def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    return Fraction(self._rank(agent, bundle))

  def _rank_gain(self, agent: int, base: frozenset[int], item: int) -> int:
    label = self._categories[item][agent - 1]
    if label is None:
      return 0
    return int(all(self._categories[e][agent - 1] != label for e in base))

  def _marginal(self, agent: int, base: frozenset[int], item: int) -> Fraction:
    return Fraction(self._rank_gain(agent, base, item))

  def valuation_class(self, agent: int) -> ValuationClass:
    return ValuationClass(ValuationKind.SUBMODULAR_BINARY)


class SupermodularComplementCost(Oracle):
  """
  The supermodular binary cost |S| - r(S), where r is the rank of the inner
  partition matroid oracle.
  """
  def __init__(self, inner: PartitionMatroidRank) -> None:
    super().__init__(Direction.CHORES, inner.n, inner.items)
    self._inner = inner

  @property
  def inner(self) -> PartitionMatroidRank:
    return self._inner

  def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    return Fraction(len(bundle) - self._inner._rank(agent, bundle))

  def _marginal(self, agent: int, base: frozenset[int], item: int) -> Fraction:
    return Fraction(1 - self._inner._rank_gain(agent, base, item))

  def valuation_class(self, agent: int) -> ValuationClass:
    return ValuationClass(ValuationKind.SUPERMODULAR_BINARY)


class ExplicitSetFunction(Oracle):
  """
  An oracle for an arbitrary set function. The function receives the agent
  and a frozen set of item ids. It should be monotone and map the empty set to
  zero, which this class does not verify.
  """
  def __init__(
    self,
    direction: Direction,
    n: int,
    items: Iterable[int],
    function: Callable[[int, frozenset[int]], Fraction],
  ) -> None:
    super().__init__(direction, n, items)
    self._function = function

  def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
    return Fraction(self._function(agent, bundle)) if bundle else Fraction(0)

  def valuation_class(self, agent: int) -> ValuationClass:
    return ValuationClass(ValuationKind.SET_FUNCTION)

# --------------------------------------------------------------------------------------

def oracle_for(
  direction: Direction,
  n: int,
  items: Iterable[Item],
  representation: Representation,
) -> Oracle:
  """
  Build the oracle for the given items. Additive items yield an
  :py:class:`AdditiveTable`. Matroid items yield a
  :py:class:`PartitionMatroidRank` for goods and a
  :py:class:`SupermodularComplementCost` for chores.

  :raises ValueError: indicates explicit items, which carry no row to build an
    oracle from.
  """
  items = tuple(items)
  if representation is Representation.ADDITIVE:
    return AdditiveTable(
      direction, n, { item.id: item.values or () for item in items })
  if representation is Representation.MATROID:
    rank = PartitionMatroidRank(n, { item.id: item.categories or () for item in items })
    return rank if direction is Direction.GOODS else SupermodularComplementCost(rank)
  raise ValueError('explicit items need an explicit set function')

def oracle_for_stream(stream: Stream, k: Optional[int] = None) -> Oracle:
  """Build the oracle for the stream or its first k items."""
  items = stream.items if k is None else stream.items[:k]
  return oracle_for(stream.direction, stream.n, items, stream.representation)

def set_value(oracle: Oracle, agent: int, bundle: Iterable[int]) -> Fraction:
  """Get the agent's value or cost for the bundle."""
  return oracle.value(agent, bundle)

def marginal(oracle: Oracle, agent: int, base: Iterable[int], item: int) -> Fraction:
  """Get the agent's marginal value or cost for adding the item to the base."""
  return oracle.marginal(agent, base, item)

def classify(oracle: Oracle, agent: int) -> ValuationClass:
  """
  Determine the tightest class for the agent. Additive weights classify as
  binary if all weights are 0 or 1 and some is 0, as bi-valued or tri-valued
  if they take two or three positive levels, and as general additive
  otherwise. A single positive level is bi-valued with a = b. Matroid oracles
  classify as submodular binary for goods and supermodular binary for chores.
  """
  return oracle.valuation_class(agent)
