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
Literal evaluators for the fairness and efficiency notions. Every function
spells out its definition with nested loops over agent pairs, removals, and
all assignments of items to bundles. Nothing here is shared with
:py:mod:`fairstream.audit`, whose results the tests compare against these.
"""

import itertools
import math

from fractions import Fraction
from typing import Callable, Iterator, Union

from fairstream.core import Allocation, Direction
from fairstream.error import BudgetExceeded
from fairstream.valuations import Oracle

Ratio = Union[Fraction, float]

LIMIT = 3 ** 8

def _agents(alloc: Allocation) -> range:
  return range(1, alloc.n + 1)

def _assignments(k: int, n: int) -> Iterator[list[frozenset[int]]]:
  if n ** k > LIMIT:
    raise BudgetExceeded(f'{n}^{k} assignments exceed the literal limit')
  for owners in itertools.product(range(n), repeat=k):
    bundles: list[set[int]] = [set() for _ in range(n)]
    for item, owner in enumerate(owners, start=1):
      bundles[owner].add(item)
    yield [frozenset(b) for b in bundles]


def literal_ef1(alloc: Allocation, oracle: Oracle) -> Ratio:
  goods = oracle.direction is Direction.GOODS
  pairs: list[Ratio] = []
  for i in _agents(alloc):
    for j in _agents(alloc):
      if i == j:
        continue
      mine, theirs = alloc.bundle(i), alloc.bundle(j)
      if goods:
        if not theirs:
          continue
        best: Ratio = Fraction(0)
        for e in theirs:
          rest = oracle.value(i, theirs - {e})
          alpha = Fraction(1) if rest == 0 else min(Fraction(1), oracle.value(i, mine) / rest)
          best = max(best, alpha)
        pairs.append(best)
      else:
        if not mine:
          continue
        least: Ratio = math.inf
        for e in mine:
          rest = oracle.value(i, mine - {e})
          other = oracle.value(i, theirs)
          if rest == 0:
            alpha: Ratio = Fraction(1)
          elif other == 0:
            alpha = math.inf
          else:
            alpha = max(Fraction(1), rest / other)
          least = min(least, alpha)
        pairs.append(least)
  if goods:
    return min(pairs, default=Fraction(1))
  return max(pairs, default=Fraction(1))


def literal_share(agent: int, k: int, n: int, oracle: Oracle) -> Fraction:
  goods = oracle.direction is Direction.GOODS
  shares = []
  for bundles in _assignments(k, n):
    values = [oracle.value(agent, b) for b in bundles]
    shares.append(min(values) if goods else max(values))
  return max(shares) if goods else min(shares)


def literal_mms(alloc: Allocation, oracle: Oracle) -> Ratio:
  goods = oracle.direction is Direction.GOODS
  ratios: list[Ratio] = []
  for i in _agents(alloc):
    share = literal_share(i, alloc.round, alloc.n, oracle)
    mine = oracle.value(i, alloc.bundle(i))
    if goods:
      ratios.append(Fraction(1) if share == 0 else min(Fraction(1), mine / share))
    elif share == 0:
      ratios.append(Fraction(1) if mine == 0 else math.inf)
    else:
      ratios.append(max(Fraction(1), mine / share))
  if goods:
    return min(ratios, default=Fraction(1))
  return max(ratios, default=Fraction(1))


def literal_optimum(k: int, n: int, oracle: Oracle) -> Fraction:
  totals = [
    sum((oracle.value(i + 1, b) for i, b in enumerate(bundles)), Fraction(0))
    for bundles in _assignments(k, n)
  ]
  return max(totals) if oracle.direction is Direction.GOODS else min(totals)


def literal_welfare(alloc: Allocation, oracle: Oracle) -> Ratio:
  actual = sum((oracle.value(i, alloc.bundle(i)) for i in _agents(alloc)), Fraction(0))
  best = literal_optimum(alloc.round, alloc.n, oracle)
  if best == 0:
    if actual == 0 or oracle.direction is Direction.GOODS:
      return Fraction(1)
    return math.inf
  return actual / best


def literal_nw(alloc: Allocation, oracle: Oracle) -> bool:
  for i in _agents(alloc):
    bundle = alloc.bundle(i)
    for e in bundle:
      if oracle.value(i, bundle) - oracle.value(i, bundle - {e}) <= 0:
        return False
  for e in alloc.discarded:
    for i in _agents(alloc):
      bundle = alloc.bundle(i)
      if oracle.value(i, bundle | {e}) - oracle.value(i, bundle) != 0:
        return False
  return True


def literal_complete(alloc: Allocation, oracle: Oracle) -> bool:
  return len(alloc.discarded) == 0 and alloc.held is None


LITERAL: dict[str, Callable[[Allocation, Oracle], object]] = {
  'EF1-goods': literal_ef1,
  'EF1-chores': literal_ef1,
  'MMS-goods': literal_mms,
  'MMS-chores': literal_mms,
  'USW': literal_welfare,
  'USC': literal_welfare,
  'NW': literal_nw,
  'Complete': literal_complete,
}

def literal_metric(definition: str, alloc: Allocation, oracle: Oracle) -> object:
  """Evaluate the named definition by exhaustive enumeration."""
  return LITERAL[definition](alloc, oracle)
