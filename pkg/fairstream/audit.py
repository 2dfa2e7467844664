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
Exact per-round fairness and efficiency metrics. For goods, ratios lie in
[0, 1] with larger being better; for chores, they lie in [1, ∞] with smaller
being better. Each metric is computed exactly, with maximin/minimax shares
and optimal welfare found by exhaustive but pruned enumeration.

Zero denominators follow fixed conventions: For goods, a pair or agent whose
benchmark is zero is satisfied. For chores, 0/0 is 1 and a positive value over
zero is infinite.

Enumeration is bounded by a budget, see :py:func:`fairstream.config.enumeration_budget`.
Exceeding it raises :py:class:`fairstream.error.BudgetExceeded`, which
:py:func:`audit_round` turns into a skipped metric.
"""

from __future__ import annotations

import dataclasses
import enum
import re

from fractions import Fraction
from typing import Any, Optional

from fairstream.config import enumeration_budget
from fairstream.core import Allocation, agents, Direction, INFINITY, Ratio
from fairstream.error import BudgetExceeded, ClassMismatch, ConfigError, ValidationError
from fairstream.serde import format_rational, parse_rational
from fairstream.valuations import AdditiveTable, Oracle

__all__ = [
  'EnumerationStats',
  'RoundMetrics',
  'Metric',
  'Bound',
  'envies',
  'ef1_raw',
  'ef1_ratio',
  'mms_share',
  'mms_raw',
  'mms_ratio',
  'welfare',
  'optimal_welfare',
  'welfare_ratio',
  'check_nw',
  'check_complete',
  'audit_round',
  'partition_count',
]

@dataclasses.dataclass
class EnumerationStats:
  """Counters for the work done by exhaustive enumeration."""
  partitions: int = 0
  assignments: int = 0

  def add(self, other: EnumerationStats) -> None:
    self.partitions += other.partitions
    self.assignments += other.assignments


@dataclasses.dataclass(frozen=True)
class RoundMetrics:
  """
  The audit of one prefix allocation. Metrics that were skipped because their
  enumeration exceeded the budget are ``None``. Constraint flags are ``None``
  when they do not apply to the direction.
  """
  round: int
  ef1: Ratio
  """EF1 ratio, capped at 1 for goods and floored at 1 for chores."""
  ef1_raw: Ratio
  mms: Optional[Ratio]
  """MMS ratio, capped or floored like EF1."""
  mms_raw: Optional[Ratio]
  welfare: Fraction
  """The utilitarian social welfare or cost."""
  optimum: Optional[Fraction]
  """The maximum welfare or minimum cost over complete assignments."""
  welfare_ratio: Optional[Ratio]
  nw_ok: Optional[bool]
  complete_ok: Optional[bool]
  shares: Optional[tuple[Fraction, ...]] = None
  """The agents' maximin or minimax shares."""

  def to_dict(self) -> dict[str, Any]:
    return {
      'round': self.round,
      'ef1': self.ef1,
      'ef1_raw': self.ef1_raw,
      'mms': self.mms,
      'mms_raw': self.mms_raw,
      'welfare': self.welfare,
      'optimum': self.optimum,
      'welfare_ratio': self.welfare_ratio,
      'nw_ok': self.nw_ok,
      'complete_ok': self.complete_ok,
      'shares': self.shares,
    }

# --------------------------------------------------------------------------------------
# Envy-Freeness up to One Item

def envies(oracle: Oracle, alloc: Allocation, i: int, j: int) -> bool:
  """Determine whether agent i strictly prefers agent j's bundle to its own."""
  own = oracle.value(i, alloc.bundle(i))
  other = oracle.value(i, alloc.bundle(j))
  return own < other if oracle.direction is Direction.GOODS else own > other

def _min_without_one(oracle: Oracle, agent: int, bundle: frozenset[int]) -> Fraction:
  return min(oracle.raw_value(agent, bundle - {e}) for e in bundle)

def ef1_raw(alloc: Allocation, oracle: Oracle) -> Ratio:
  """
  Compute the uncapped EF1 ratio. For goods, this is the minimum over ordered
  pairs of agents i and j with nonempty A_j of v_i(A_i) over the smallest
  v_i(A_j - e); pairs with zero denominator do not constrain, and no
  constraining pair yields infinity. For chores, this is the maximum over pairs
  with nonempty A_i of the smallest c_i(A_i - e) over c_i(A_j), or zero
  without such pairs.
  """
  goods = oracle.direction is Direction.GOODS
  result: Ratio = INFINITY if goods else Fraction(0)
  for i in agents(alloc.n):
    mine = alloc.bundle(i)
    for j in agents(alloc.n):
      if i == j:
        continue
      theirs = alloc.bundle(j)
      if goods:
        if not theirs:
          continue
        denominator = _min_without_one(oracle, i, theirs)
        if denominator == 0:
          continue
        result = min(result, oracle.raw_value(i, mine) / denominator)
      else:
        if not mine:
          continue
        numerator = _min_without_one(oracle, i, mine)
        denominator = oracle.raw_value(i, theirs)
        if denominator == 0:
          ratio: Ratio = Fraction(1) if numerator == 0 else INFINITY
        else:
          ratio = numerator / denominator
        result = max(result, ratio)
  return result

def _clamp(value: Ratio, direction: Direction) -> Ratio:
  if direction is Direction.GOODS:
    return min(value, Fraction(1))
  return max(value, Fraction(1))

def ef1_ratio(alloc: Allocation, oracle: Oracle) -> Ratio:
  """Compute the EF1 ratio, capped at 1 for goods and floored at 1 for chores."""
  return _clamp(ef1_raw(alloc, oracle), oracle.direction)

# --------------------------------------------------------------------------------------
# Maximin and Minimax Shares

def partition_count(k: int, n: int) -> int:
  """
  Count the partitions of k labeled items into at most n unlabeled, nonempty
  blocks, i.e., the sum of Stirling numbers of the second kind S(k, m) for m up
  to n. This is the number of canonical partitions the share computation
  visits without pruning.
  """
  if k == 0:
    return 1
  row = [1] + [0] * n
  for _ in range(k):
    row = [0] + [m * row[m] + row[m - 1] for m in range(1, n + 1)]
  return sum(row[1:])

def _budget(budget: Optional[int]) -> int:
  return enumeration_budget(budget)

def mms_share(
  agent: int,
  k: int,
  n: int,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> Fraction:
  """
  Compute the agent's maximin share (goods) or minimax share (chores) over the
  first k items and n bundles. The enumeration only visits canonical
  partitions, in which blocks are opened in item order, and prunes branches
  that cannot improve on the best partition so far.

  :raises BudgetExceeded: indicates too many partitions.
  """
  limit = _budget(budget)
  count = partition_count(k, n)
  if count > limit:
    raise BudgetExceeded(
      f'share of agent {agent} over {k} items needs {count:,} partitions > {limit:,}')

  items = list(range(1, k + 1))
  goods = oracle.direction is Direction.GOODS
  if k == 0:
    return Fraction(0)
  if goods and k < n:
    return Fraction(0)

  singles = [oracle.gain(agent, frozenset(), e) for e in items]
  suffix = [Fraction(0)] * (k + 1)
  for index in range(k - 1, -1, -1):
    suffix[index] = suffix[index + 1] + singles[index]
  prune_goods = goods and oracle.is_subadditive

  blocks: list[frozenset[int]] = []
  values: list[Fraction] = []
  best: Optional[Fraction] = None
  visited = 0

  def search(index: int) -> None:
    nonlocal best, visited
    if index == k:
      visited += 1
      if goods:
        worst = min(values) if len(values) == n else Fraction(0)
        if best is None or worst > best:
          best = worst
      else:
        worst = max(values)
        if best is None or worst < best:
          best = worst
      return

    if best is not None:
      if goods and prune_goods:
        floor = min(values) if len(values) == n else Fraction(0)
        if floor + suffix[index] <= best:
          return
      elif not goods and values and max(values) >= best:
        return

    item = items[index]
    for position in range(len(blocks)):
      before = blocks[position], values[position]
      values[position] = before[1] + oracle.gain(agent, before[0], item)
      blocks[position] = before[0] | {item}
      search(index + 1)
      blocks[position], values[position] = before
    if len(blocks) < n:
      blocks.append(frozenset((item,)))
      values.append(singles[index])
      search(index + 1)
      blocks.pop()
      values.pop()

  search(0)
  if stats is not None:
    stats.partitions += visited
  assert best is not None
  return best

def mms_raw(
  alloc: Allocation,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> tuple[Ratio, tuple[Fraction, ...]]:
  """
  Compute the uncapped MMS ratio together with all agents' shares. For goods,
  this is the minimum of v_i(A_i) / MMS_i over agents with positive share, or
  infinity if there is none. For chores, this is the maximum of
  c_i(A_i) / MMS_i, where 0/0 is 1 and a positive cost over zero is infinite.

  :raises BudgetExceeded: indicates too many partitions.
  """
  goods = oracle.direction is Direction.GOODS
  result: Ratio = INFINITY if goods else Fraction(0)
  shares = []
  for i in agents(alloc.n):
    share = mms_share(i, alloc.round, alloc.n, oracle, budget, stats)
    shares.append(share)
    mine = oracle.value(i, alloc.bundle(i))
    if goods:
      if share > 0:
        result = min(result, mine / share)
    else:
      if share == 0:
        ratio: Ratio = Fraction(1) if mine == 0 else INFINITY
      else:
        ratio = mine / share
      result = max(result, ratio)
  return result, tuple(shares)

def mms_ratio(
  alloc: Allocation,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> Ratio:
  """
  Compute the MMS ratio, capped at 1 for goods and floored at 1 for chores.

  :raises BudgetExceeded: indicates too many partitions.
  """
  raw, _ = mms_raw(alloc, oracle, budget, stats)
  return _clamp(raw, oracle.direction)

# --------------------------------------------------------------------------------------
# Utilitarian Welfare

def welfare(alloc: Allocation, oracle: Oracle) -> Fraction:
  """Compute the utilitarian social welfare (goods) or cost (chores)."""
  return sum((oracle.value(i, alloc.bundle(i)) for i in agents(alloc.n)), Fraction(0))

def optimal_welfare(
  k: int,
  n: int,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> Fraction:
  """
  Compute the maximum welfare (goods) or minimum cost (chores) over all
  complete assignments of the first k items to n agents. Additive oracles take
  the per-item best agent. All other oracles enumerate assignments with
  branch-and-bound pruning.

  :raises BudgetExceeded: indicates too many assignments for a non-additive
    oracle.
  """
  goods = oracle.direction is Direction.GOODS
  items = list(range(1, k + 1))
  pick = max if goods else min

  if isinstance(oracle, AdditiveTable):
    return sum(
      (pick(oracle.weight(i, e) for i in agents(n)) for e in items), Fraction(0))

  limit = _budget(budget)
  if n ** k > limit:
    raise BudgetExceeded(f'welfare over {k} items needs {n ** k:,} assignments > {limit:,}')

  singles = [[oracle.gain(i, frozenset(), e) for i in agents(n)] for e in items]
  suffix = [Fraction(0)] * (k + 1)
  for index in range(k - 1, -1, -1):
    suffix[index] = suffix[index + 1] + max(singles[index])
  prune_goods = goods and oracle.is_subadditive

  bundles: list[frozenset[int]] = [frozenset() for _ in range(n)]
  best: Optional[Fraction] = None
  visited = 0

  def search(index: int, total: Fraction) -> None:
    nonlocal best, visited
    if index == k:
      visited += 1
      if best is None or (total > best if goods else total < best):
        best = total
      return
    if best is not None:
      if prune_goods and total + suffix[index] <= best:
        return
      if not goods and total >= best:
        return
    item = items[index]
    for i in range(n):
      before = bundles[i]
      gain = oracle.gain(i + 1, before, item)
      bundles[i] = before | {item}
      search(index + 1, total + gain)
      bundles[i] = before

  search(0, Fraction(0))
  if stats is not None:
    stats.assignments += visited
  assert best is not None
  return best

def welfare_ratio(
  alloc: Allocation,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> Ratio:
  """
  Compute USW over max-USW for goods or USC over min-USC for chores. 0/0 is 1,
  and a positive cost over zero is infinite.

  :raises BudgetExceeded: indicates too many assignments.
  """
  best = optimal_welfare(alloc.round, alloc.n, oracle, budget, stats)
  return _quotient(welfare(alloc, oracle), best, oracle.direction)

def _quotient(actual: Fraction, best: Fraction, direction: Direction) -> Ratio:
  if best == 0:
    return Fraction(1) if actual == 0 or direction is Direction.GOODS else INFINITY
  return actual / best

# --------------------------------------------------------------------------------------
# Constraints

def check_nw(alloc: Allocation, oracle: Oracle) -> bool:
  """
  Determine whether a goods allocation is non-wasteful: every assigned item
  has positive marginal value within its bundle, and every discarded item has
  zero marginal value for every agent's bundle.

  :raises ClassMismatch: indicates chores.
  """
  if oracle.direction is not Direction.GOODS:
    raise ClassMismatch('non-wastefulness only applies to goods')
  for i in agents(alloc.n):
    bundle = alloc.bundle(i)
    for e in bundle:
      if oracle.gain(i, bundle - {e}, e) <= 0:
        return False
  for e in alloc.discarded:
    for i in agents(alloc.n):
      if oracle.gain(i, alloc.bundle(i), e) != 0:
        return False
  return True

def check_complete(alloc: Allocation) -> bool:
  """Determine whether nothing has been discarded and nothing is held."""
  return not alloc.discarded and alloc.held is None

def audit_round(
  alloc: Allocation,
  oracle: Oracle,
  budget: Optional[int] = None,
  stats: Optional[EnumerationStats] = None,
) -> RoundMetrics:
  """
  Audit the allocation for all metrics. MMS and optimal welfare are skipped,
  i.e., ``None``, if their enumeration exceeds the budget.
  """
  direction = oracle.direction
  raw_ef1 = ef1_raw(alloc, oracle)

  mms: Optional[Ratio] = None
  raw_mms: Optional[Ratio] = None
  shares: Optional[tuple[Fraction, ...]] = None
  try:
    raw_mms, shares = mms_raw(alloc, oracle, budget, stats)
    mms = _clamp(raw_mms, direction)
  except BudgetExceeded:
    pass

  actual = welfare(alloc, oracle)
  optimum: Optional[Fraction] = None
  ratio: Optional[Ratio] = None
  try:
    optimum = optimal_welfare(alloc.round, alloc.n, oracle, budget, stats)
    ratio = _quotient(actual, optimum, direction)
  except BudgetExceeded:
    pass

  goods = direction is Direction.GOODS
  return RoundMetrics(
    round=alloc.round,
    ef1=_clamp(raw_ef1, direction),
    ef1_raw=raw_ef1,
    mms=mms,
    mms_raw=raw_mms,
    welfare=actual,
    optimum=optimum,
    welfare_ratio=ratio,
    nw_ok=check_nw(alloc, oracle) if goods else None,
    complete_ok=None if goods else check_complete(alloc),
    shares=shares,
  )

# --------------------------------------------------------------------------------------
# Metrics and Bounds

class Metric(enum.Enum):
  EF1 = 'EF1'
  MMS = 'MMS'
  USW = 'USW'
  USC = 'USC'

  @property
  def is_welfare(self) -> bool:
    return self in (Metric.USW, Metric.USC)

  def check(self, direction: Direction) -> None:
    """
    :raises ClassMismatch: indicates a welfare metric that does not fit the
      direction.
    """
    if self is Metric.USW and direction is not Direction.GOODS:
      raise ClassMismatch('USW only applies to goods; use USC for chores')
    if self is Metric.USC and direction is not Direction.CHORES:
      raise ClassMismatch('USC only applies to chores; use USW for goods')

  def of(self, metrics: RoundMetrics) -> Optional[Ratio]:
    """Look up this metric in an audit, which may have skipped it."""
    if self is Metric.EF1:
      return metrics.ef1
    if self is Metric.MMS:
      return metrics.mms
    return metrics.welfare_ratio

  def measure(
    self,
    alloc: Allocation,
    oracle: Oracle,
    budget: Optional[int] = None,
    stats: Optional[EnumerationStats] = None,
  ) -> Ratio:
    """
    Compute this metric for the allocation.

    :raises BudgetExceeded: indicates too much enumeration.
    """
    if self is Metric.EF1:
      return ef1_ratio(alloc, oracle)
    if self is Metric.MMS:
      return mms_ratio(alloc, oracle, budget, stats)
    return welfare_ratio(alloc, oracle, budget, stats)


_BOUND_SYNTAX = re.compile(r'^\s*([A-Za-z0-9]+)\s*(>=|<=)\s*(\S+)\s*$')


@dataclasses.dataclass(frozen=True)
class Bound:
  """A lower or upper bound on a metric, such as ``EF1>=1/2`` or ``MMS<=5/3``."""

  metric: Metric
  at_least: bool
  value: Ratio

  @classmethod
  def parse(cls, text: str) -> Bound:
    """
    Parse the textual form of a bound.

    :raises ConfigError: indicates malformed text.
    """
    match = _BOUND_SYNTAX.match(text)
    if match is None:
      raise ConfigError(f'"{text}" is not a bound such as "EF1>=1/2"')
    try:
      metric = Metric(match.group(1).upper())
    except ValueError:
      raise ConfigError(f'"{match.group(1)}" is not one of EF1, MMS, USW, USC') from None
    try:
      value = parse_rational(match.group(3))
    except ValidationError as x:
      raise ConfigError(f'bound "{text}" has malformed value: {x}') from None
    return cls(metric, match.group(2) == '>=', value)

  def holds(self, value: Optional[Ratio]) -> bool:
    """Determine whether the value meets the bound. Skipped values always do."""
    if value is None:
      return True
    return value >= self.value if self.at_least else value <= self.value

  def __str__(self) -> str:
    return f'{self.metric.value}{">=" if self.at_least else "<="}{format_rational(self.value)}'
