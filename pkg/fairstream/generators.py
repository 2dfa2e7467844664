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
Seeded random streams within the admissible classes of the allocation
algorithms. A :py:class:`GeneratorSpec` names a family, the direction, the
number of agents and items, and further options. The family's textual form
doubles as the command line syntax, e.g., ``bivalued(1,5)``,
``trivalued(1/10,1,10)``, or ``partition-matroid``. Generation is
deterministic for a given spec and seed, and every generated stream declares
the classes of its agents in its header.
"""

from __future__ import annotations

import dataclasses
import enum
import random
import re

from fractions import Fraction
from typing import Iterable, Iterator, Optional

from fairstream.core import agents, Direction, Item, Representation, Stream
from fairstream.error import ConfigError, ValidationError
from fairstream.serde import parse_rational
from fairstream.valuations import ValuationClass, ValuationKind

__all__ = [
  'Family',
  'Order',
  'GeneratorSpec',
  'parse_family',
  'generate',
  'generate_many',
]

class Family(enum.Enum):
  """A family of random streams."""
  BINARY = 'binary'
  BIVALUED = 'bivalued'
  TRIVALUED = 'trivalued'
  ADDITIVE = 'additive'
  PARTITION_MATROID = 'partition-matroid'
  SUPERMOD_COMPLEMENT = 'supermod-complement'
  BINARY_BIVALUED = 'binary-bivalued'
  """Agents 1 to n - 1 share one binary row, agent n is bi-valued."""

  @property
  def arity(self) -> int:
    """The number of levels the family takes."""
    if self in (Family.BIVALUED, Family.BINARY_BIVALUED):
      return 2
    return 3 if self is Family.TRIVALUED else 0

  @property
  def is_matroid(self) -> bool:
    return self in (Family.PARTITION_MATROID, Family.SUPERMOD_COMPLEMENT)


class Order(enum.Enum):
  """How monotone streams sort each agent's column."""
  ASCENDING = 'ascending'
  DESCENDING = 'descending'
  MIXED = 'mixed'
  """Each agent sorts in a randomly chosen direction."""


_FAMILY_SYNTAX = re.compile(r'^\s*([a-z-]+)\s*(?:\((.*)\))?\s*$')

def parse_family(text: str) -> tuple[Family, tuple[Fraction, ...]]:
  """
  Parse a family with its levels.

  :raises ConfigError: indicates an unknown family or wrong levels.
  """
  match = _FAMILY_SYNTAX.match(text)
  if match is None:
    raise ConfigError(f'"{text}" is not a stream family')
  try:
    family = Family(match.group(1))
  except ValueError:
    choices = ', '.join(f.value for f in Family)
    raise ConfigError(f'"{match.group(1)}" is not one of {choices}') from None

  levels: list[Fraction] = []
  if match.group(2) is not None and match.group(2).strip():
    for text_level in match.group(2).split(','):
      try:
        level = parse_rational(text_level.strip())
      except ValidationError as x:
        raise ConfigError(f'family "{text}" has a malformed level: {x}') from None
      if not isinstance(level, Fraction):
        raise ConfigError(f'family "{text}" has an infinite level')
      levels.append(level)
  if len(levels) != family.arity:
    raise ConfigError(f'{family.value} takes {family.arity} levels, not {len(levels)}')
  return family, tuple(levels)


@dataclasses.dataclass(frozen=True)
class GeneratorSpec:
  """The parameters for generating random streams."""

  family: Family
  direction: Direction = Direction.GOODS
  """Ignored for the matroid families, which fix the direction."""
  n: int = 2
  t: int = 6
  levels: tuple[Fraction, ...] = ()
  categories: int = 4
  """The number of categories per agent for the matroid families."""
  loops: bool = True
  """Whether matroid rows may contain loops, i.e., no category."""
  maximum: int = 10
  """The largest value for general additive streams."""
  monotone: Optional[Order] = None
  deadline: int = 0

  def __post_init__(self) -> None:
    if self.n < 1:
      raise ConfigError(f'generator needs at least one agent, not {self.n}')
    if self.t < 0:
      raise ConfigError(f'generator cannot produce {self.t} items')
    if len(self.levels) != self.family.arity:
      raise ConfigError(
        f'{self.family.value} takes {self.family.arity} levels, not {len(self.levels)}')
    if self.family is Family.BINARY_BIVALUED and self.n < 2:
      raise ConfigError(f'{self.family.value} needs at least two agents')
    if self.family.is_matroid and self.categories < 1:
      raise ConfigError(f'generator needs at least one category, not {self.categories}')
    if self.maximum < 1:
      raise ConfigError(f'generator needs a positive maximum, not {self.maximum}')
    if self.monotone is not None and self.family.is_matroid:
      raise ConfigError('matroid streams cannot be monotone')
    if self.deadline not in (0, 1):
      raise ConfigError(f'deadline {self.deadline} is neither 0 nor 1')
    try:
      self.profile()
    except ValidationError as x:
      raise ConfigError(str(x)) from None

  @classmethod
  def parse(cls, family: str, **options: object) -> GeneratorSpec:
    """Create a spec from a textual family and further options."""
    kind, levels = parse_family(family)
    return cls(kind, levels=levels, **options)  # type: ignore[arg-type]

  @property
  def effective_direction(self) -> Direction:
    if self.family is Family.PARTITION_MATROID:
      return Direction.GOODS
    if self.family is Family.SUPERMOD_COMPLEMENT:
      return Direction.CHORES
    return self.direction

  def profile(self) -> tuple[ValuationClass, ...]:
    """Get the per-agent classes every generated stream declares."""
    family = self.family
    if family is Family.BINARY:
      return (ValuationClass.binary(),) * self.n
    if family is Family.BIVALUED:
      return (ValuationClass.bivalued(*self.levels),) * self.n
    if family is Family.TRIVALUED:
      return (ValuationClass.trivalued(*self.levels),) * self.n
    if family is Family.ADDITIVE:
      return (ValuationClass(ValuationKind.GENERAL_ADDITIVE),) * self.n
    if family is Family.PARTITION_MATROID:
      return (ValuationClass(ValuationKind.SUBMODULAR_BINARY),) * self.n
    if family is Family.SUPERMOD_COMPLEMENT:
      return (ValuationClass(ValuationKind.SUPERMODULAR_BINARY),) * self.n
    return (
      (ValuationClass.binary(),) * (self.n - 1) + (ValuationClass.bivalued(*self.levels),))

  def describe(self) -> str:
    text = self.family.value
    if self.levels:
      text += '(' + ','.join(str(level) for level in self.levels) + ')'
    return f'{text} {self.effective_direction.value} n={self.n} t={self.t}'

# --------------------------------------------------------------------------------------

def _additive_rows(spec: GeneratorSpec, rng: random.Random) -> list[list[Fraction]]:
  n, family = spec.n, spec.family
  rows: list[list[Fraction]] = []
  for _ in range(spec.t):
    if family is Family.BINARY:
      row = [Fraction(rng.randint(0, 1)) for _ in agents(n)]
    elif family is Family.ADDITIVE:
      row = [Fraction(rng.randint(0, spec.maximum)) for _ in agents(n)]
    elif family is Family.BINARY_BIVALUED:
      shared = Fraction(rng.randint(0, 1))
      row = [shared] * (n - 1) + [rng.choice(spec.levels)]
    else:
      row = [rng.choice(spec.levels) for _ in agents(n)]
    rows.append(row)
  return rows

def _sort_columns(
  rows: list[list[Fraction]], n: int, order: Order, rng: random.Random
) -> list[list[Fraction]]:
  columns = [sorted(row[agent] for row in rows) for agent in range(n)]
  if order is Order.MIXED:
    flips = [rng.random() < 0.5 for _ in range(n)]
    columns = [c[::-1] if flip else c for c, flip in zip(columns, flips)]
  elif order is Order.DESCENDING:
    columns = [c[::-1] for c in columns]
  return [[columns[agent][index] for agent in range(n)] for index in range(len(rows))]

def generate(spec: GeneratorSpec, seed: int) -> Stream:
  """Generate a random stream for the spec and seed."""
  rng = random.Random(seed)
  profile = tuple(str(c) for c in spec.profile())
  direction = spec.effective_direction

  if spec.family.is_matroid:
    universes = tuple(
      tuple(f'c{index}' for index in range(1, spec.categories + 1)) for _ in agents(spec.n))
    choices: list[Optional[str]] = list(universes[0])
    if spec.loops:
      choices.append(None)
    items = tuple(
      Item(index, categories=tuple(rng.choice(choices) for _ in agents(spec.n)))
      for index in range(1, spec.t + 1)
    )
    return Stream(
      direction, spec.n, items,
      representation=Representation.MATROID,
      deadline=spec.deadline,
      profile=profile,
      universes=universes,
    )

  rows = _additive_rows(spec, rng)
  if spec.monotone is not None:
    if spec.family is Family.BINARY_BIVALUED and spec.monotone is Order.MIXED:
      # Keep the shared binary row identical across agents 1 to n - 1.
      flip = rng.random() < 0.5
      rows = _sort_columns(rows, spec.n, Order.DESCENDING if flip else Order.ASCENDING, rng)
    else:
      rows = _sort_columns(rows, spec.n, spec.monotone, rng)
  items = tuple(Item(index, values=tuple(row)) for index, row in enumerate(rows, start=1))
  return Stream(
    direction, spec.n, items,
    deadline=spec.deadline,
    profile=profile,
    monotone=spec.monotone is not None,
  )

def generate_many(spec: GeneratorSpec, seeds: Iterable[int]) -> Iterator[Stream]:
  """Generate one stream per seed."""
  for seed in seeds:
    yield generate(spec, seed)
