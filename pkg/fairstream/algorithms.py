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
Online allocation algorithms. Every algorithm is an :py:class:`Allocator`,
i.e., a small state machine that answers each arriving item, presented as an
:py:class:`ItemView`, with a :py:class:`fairstream.core.Decision`. Allocators
for deadline-1 streams also answer :py:meth:`Allocator.flush` at the end of the
stream.

Allocators are created by name through :py:func:`create_allocator`. Their
constructors check the algorithm's preconditions against the
:py:class:`Setting` and raise :py:class:`fairstream.error.ClassMismatch`,
:py:class:`fairstream.error.WrongAgentCount`,
:py:class:`fairstream.error.DeadlineUnsupported`, or
:py:class:`fairstream.error.NotMonotone`. In strict mode, the default, each
arriving item is also checked against the declared valuation classes.
Non-strict mode skips all class checks, so that allocators can be played
against adversarial streams outside their admissible class.

Each allocator instance is stateful and must be used for exactly one stream.
"""

from __future__ import annotations

import abc
import dataclasses
import enum

from fractions import Fraction
from typing import Any, Callable, ClassVar, Optional, Sequence

from fairstream.audit import envies
from fairstream.core import (
  Allocation,
  agents,
  Decision,
  Direction,
  is_monotone,
  Item,
  Representation,
  Stream,
)
from fairstream.error import (
  ClassMismatch,
  ConfigError,
  DeadlineUnsupported,
  NotMonotone,
  WrongAgentCount,
)
from fairstream.valuations import (
  classify,
  Oracle,
  oracle_for_stream,
  ValuationClass,
  ValuationKind,
)

__all__ = [
  'Setting',
  'ItemView',
  'Mode',
  'Transition',
  'Allocator',
  'GreedyNW',
  'MarginalGreedy',
  'BivaluedTwoGoods',
  'BivaluedTwoChores',
  'AdaptedPicking',
  'CompelledGreedy',
  'AdaptedChoresPicking',
  'DeadlineMatching',
  'RoundRobin',
  'Replay',
  'ALLOCATORS',
  'create_allocator',
]

@dataclasses.dataclass(frozen=True)
class Setting:
  """What an allocator may know before the first item arrives."""

  direction: Direction
  n: int
  deadline: int = 0
  profile: tuple[ValuationClass, ...] = ()
  """The agents' valuation classes, with agent i's class at index i - 1."""
  monotone: bool = False

  @classmethod
  def for_stream(cls, stream: Stream) -> Setting:
    """
    Create the setting for a stream. The profile is the stream's declared
    profile or, without declaration, the tightest class of each agent over the
    entire stream.

    :raises NotMonotone: indicates a stream declared monotone that is not.
    """
    monotone = is_monotone(stream)
    if stream.monotone and not monotone:
      raise NotMonotone('stream is declared monotone but is not')

    if stream.profile:
      profile = tuple(ValuationClass.parse(text) for text in stream.profile)
    elif stream.representation is Representation.EXPLICIT:
      profile = tuple(ValuationClass(ValuationKind.SET_FUNCTION) for _ in agents(stream.n))
    else:
      oracle = oracle_for_stream(stream)
      profile = tuple(classify(oracle, agent) for agent in agents(stream.n))

    return cls(stream.direction, stream.n, stream.deadline, profile, monotone)

  def valuation_class(self, agent: int) -> Optional[ValuationClass]:
    return self.profile[agent - 1] if self.profile else None


@dataclasses.dataclass(frozen=True)
class ItemView:
  """
  An arriving item as seen by an allocator: the item itself, the allocation
  before the item, and an oracle covering all items arrived so far, including
  this one.
  """

  item: Item
  allocation: Allocation
  oracle: Oracle

  @property
  def id(self) -> int:
    return self.item.id

  def value(self, agent: int, item: Optional[int] = None) -> Fraction:
    """Get the agent's value or cost for this (or another arrived) item alone."""
    return self.oracle.singleton(agent, self.id if item is None else item)

  def marginal(self, agent: int) -> Fraction:
    """Get the agent's marginal for adding this item to its current bundle."""
    return self.oracle.marginal(agent, self.allocation.bundle(agent), self.id)

  def worth(self, agent: int, owner: int) -> Fraction:
    """Get the agent's value or cost for the owner's current bundle."""
    return self.oracle.value(agent, self.allocation.bundle(owner))

  def envies(self, i: int, j: int) -> bool:
    return envies(self.oracle, self.allocation, i, j)

# --------------------------------------------------------------------------------------

class Mode(enum.Enum):
  """The modes of the two-agent controllers."""
  BASE = 'base'
  """Envy-graph procedure."""
  PBC = 'pbc'
  """Preliminary cycle breaking."""
  DBC = 'dbc'
  """Deep cycle breaking."""


@dataclasses.dataclass(frozen=True)
class Transition:
  """A mode change of a two-agent controller upon an item's arrival."""
  round: int
  source: Mode
  target: Mode
  i: int
  j: int


class Allocator(abc.ABC):
  """
  The base class for online allocators. Subclasses declare their registry
  ``name``, check preconditions in :py:meth:`check_setting` and
  :py:meth:`check_item`, and make decisions in :py:meth:`decide`.
  """

  name: ClassVar[str] = ''

  def __init__(self, setting: Setting, *, strict: bool = True) -> None:
    self._setting = setting
    self._strict = strict
    self.check_setting()

  @property
  def setting(self) -> Setting:
    return self._setting

  @property
  def strict(self) -> bool:
    return self._strict

  def check_setting(self) -> None:
    """Check the setting against the algorithm's preconditions."""

  def check_item(self, view: ItemView) -> None:
    """Check that the arriving item's row fits the declared classes."""
    values = view.item.values
    if values is None or not self._setting.profile:
      return
    for agent, value in enumerate(values, start=1):
      cls = self._setting.profile[agent - 1]
      if not cls.admits(value):
        raise ClassMismatch(
          f'{self.name} got e{view.id} with entry {value} for agent {agent}, '
          f'which is not {cls}')

  def step(self, view: ItemView) -> Decision:
    """Decide on the arriving item, checking it first in strict mode."""
    if self._strict:
      self.check_item(view)
    return self.decide(view)

  @abc.abstractmethod
  def decide(self, view: ItemView) -> Decision:
    ...

  def flush(self, allocation: Allocation, oracle: Oracle) -> Optional[int]:
    """
    Pick the recipient of the held item once the stream has ended, or return
    ``None`` if nothing is held.
    """
    return None

  # ------------------------------------------------------------------------------------
  # Precondition helpers

  def _require_direction(self, direction: Direction) -> None:
    if self._setting.direction is not direction:
      raise ClassMismatch(f'{self.name} allocates {direction.value}, not '
                          f'{self._setting.direction.value}')

  def _require_agents(self, count: int, *, at_least: bool = False) -> None:
    n = self._setting.n
    if (n < count) if at_least else (n != count):
      qualifier = 'at least ' if at_least else ''
      raise WrongAgentCount(f'{self.name} needs {qualifier}{count} agents, not {n}')

  def _require_classes(
    self, predicate: Callable[[ValuationClass], bool], description: str,
    subset: Optional[Sequence[int]] = None,
  ) -> None:
    if not self._strict:
      return
    if not self._setting.profile:
      raise ClassMismatch(f'{self.name} needs declared valuation classes')
    for agent in subset or agents(self._setting.n):
      cls = self._setting.profile[agent - 1]
      if not predicate(cls):
        raise ClassMismatch(f'{self.name} needs {description} for agent {agent}, not {cls}')

  def _levels(self, agent: int) -> tuple[Fraction, Fraction]:
    """Get the agent's low and high levels."""
    cls = self._setting.valuation_class(agent)
    if cls is None or not cls.levels:
      raise ClassMismatch(f'{self.name} needs declared levels for agent {agent}')
    return cls.levels[0], cls.levels[-1]


def _is_binary_marginal(cls: ValuationClass) -> bool:
  return cls.is_binary or cls.kind is ValuationKind.SUBMODULAR_BINARY

def _is_leveled_bivalued(cls: ValuationClass) -> bool:
  return cls.is_bivalued and cls.has_levels

# ======================================================================================
# Goods with Binary Marginals

class GreedyNW(Allocator):
  """Give each item to the first agent in fixed order with positive marginal."""

  name = 'greedy_nw'

  def check_setting(self) -> None:
    self._require_direction(Direction.GOODS)
    self._require_classes(_is_binary_marginal, 'binary marginals')

  def decide(self, view: ItemView) -> Decision:
    for agent in agents(self._setting.n):
      if view.marginal(agent) > 0:
        return Decision.assign(agent)
    return Decision.discard()


class MarginalGreedy(Allocator):
  """
  Scan the priority order and give each item to the first agent with positive
  marginal, who then moves to the back of the order. Items without positive
  marginal are discarded. With ``monotone=True``, the algorithm accepts any
  additive valuations on monotone streams instead of binary marginals.
  """

  name = 'marginal_greedy'

  def __init__(
    self,
    setting: Setting,
    *,
    strict: bool = True,
    order: Optional[Sequence[int]] = None,
    monotone: bool = False,
  ) -> None:
    self._monotone = monotone
    super().__init__(setting, strict=strict)
    self._order = _priority_order(setting.n, order)

  def check_setting(self) -> None:
    self._require_direction(Direction.GOODS)
    if self._monotone:
      if self._strict and not self._setting.monotone:
        raise NotMonotone(f'{self.name} in monotone mode needs a monotone stream')
      self._require_classes(lambda c: c.is_additive, 'additive valuations')
    else:
      self._require_classes(_is_binary_marginal, 'binary marginals')

  @property
  def order(self) -> tuple[int, ...]:
    """The current priority order."""
    return tuple(self._order)

  def check_item(self, view: ItemView) -> None:
    if not self._monotone:
      super().check_item(view)

  def decide(self, view: ItemView) -> Decision:
    for position, agent in enumerate(self._order):
      if view.marginal(agent) > 0:
        del self._order[position]
        self._order.append(agent)
        return Decision.assign(agent)
    return Decision.discard()


def _priority_order(n: int, order: Optional[Sequence[int]]) -> list[int]:
  if order is None:
    return list(agents(n))
  result = [int(agent) for agent in order]
  if sorted(result) != list(agents(n)):
    raise ConfigError(f'order {result} is not a permutation of 1..{n}')
  return result

# ======================================================================================
# Two Agents with Bi-Valued Valuations

class _TwoAgentController(Allocator):
  """
  The shared machinery of the two-agent bi-valued controllers: the envy-graph
  procedure in mode BASE hands off to preliminary and then deep cycle breaking,
  which both return to BASE once the allocation is EF1 without envy cycle.
  Phase (λ) and case (μ) are the cycle-breaking registers.
  """

  direction: ClassVar[Direction]

  def __init__(self, setting: Setting, *, strict: bool = True) -> None:
    super().__init__(setting, strict=strict)
    self._levels_of = {agent: self._levels(agent) for agent in (1, 2)}
    self._mode = Mode.BASE
    self._phase = 1
    self._case = 0
    self._i = 1
    self._j = 2
    self._transitions: list[Transition] = []

  def check_setting(self) -> None:
    self._require_direction(self.direction)
    self._require_agents(2)
    self._require_classes(_is_leveled_bivalued, 'bi-valued levels')

  @property
  def mode(self) -> Mode:
    return self._mode

  @property
  def phase(self) -> int:
    return self._phase

  @property
  def case(self) -> int:
    return self._case

  @property
  def pair(self) -> tuple[int, int]:
    """The agents i and j of the current cycle breaking."""
    return self._i, self._j

  @property
  def transitions(self) -> tuple[Transition, ...]:
    return tuple(self._transitions)

  def _enter(self, mode: Mode, round: int) -> None:
    self._transitions.append(Transition(round, self._mode, mode, self._i, self._j))
    self._mode = mode
    self._phase = 1
    self._case = 0

  def _high(self, agent: int, value: Fraction) -> bool:
    return value >= self._levels_of[agent][1]

  def decide(self, view: ItemView) -> Decision:
    if self._mode is Mode.BASE:
      return self._base(view)
    if self._mode is Mode.PBC:
      return self._preliminary(view)
    return self._deep(view)

  @abc.abstractmethod
  def _base(self, view: ItemView) -> Decision:
    ...

  @abc.abstractmethod
  def _preliminary(self, view: ItemView) -> Decision:
    ...

  @abc.abstractmethod
  def _deep(self, view: ItemView) -> Decision:
    ...


class BivaluedTwoGoods(_TwoAgentController):
  """Allocate goods to two agents with bi-valued valuations."""

  name = 'bivalued_two_goods'
  direction = Direction.GOODS

  def _base(self, view: ItemView) -> Decision:
    one_envies, two_envies = view.envies(1, 2), view.envies(2, 1)
    if not one_envies and not two_envies:
      high = self._high(1, view.value(1)), self._high(2, view.value(2))
      if high[0] == high[1]:
        return Decision.assign(1)
      return Decision.assign(1 if high[0] else 2)

    # Agent i is the unenvied envier.
    i = 1 if one_envies else 2
    j = 3 - i
    cycle = (
      view.worth(i, i) + view.value(i) < view.worth(i, j)
      and view.worth(j, j) < view.worth(j, i) + view.value(j)
    )
    if not cycle:
      return Decision.assign(i)
    self._i, self._j = i, j
    self._enter(Mode.PBC, view.id)
    return self._preliminary(view)

  def _preliminary(self, view: ItemView) -> Decision:
    i, j = self._i, self._j
    if self._phase == 1:
      if len(view.allocation.bundle(j)) == 1:
        self._enter(Mode.BASE, view.id)
        return Decision.assign(j)
      self._phase = 2
      if self._high(j, view.value(j)):
        self._case = 1
        return Decision.assign(j)
      self._case = 2
      return Decision.assign(i)

    if self._case == 1:
      self._enter(Mode.BASE, view.id)
      return Decision.assign(i)
    if not self._high(i, view.value(i)):
      self._enter(Mode.BASE, view.id)
      return Decision.assign(j)
    self._enter(Mode.DBC, view.id)
    return Decision.assign(i)

  def _deep(self, view: ItemView) -> Decision:
    i, j = self._i, self._j
    high_i, high_j = self._high(i, view.value(i)), self._high(j, view.value(j))

    if self._phase == 1:
      self._phase = 2
      if not high_i and high_j:
        self._case = 1
      elif high_i and high_j:
        self._case = 2
      elif not high_i and not high_j:
        self._case = 3
      else:
        self._case = 4
        return Decision.assign(i)
      return Decision.assign(j)

    recipient = j
    if self._case == 2:
      if high_i:
        recipient, self._phase = i, 1
    elif self._case == 3:
      if not high_j:
        recipient, self._phase = i, 1
    elif self._case == 4:
      self._phase = 1
    if self._phase == 2:
      self._enter(Mode.BASE, view.id)
    return Decision.assign(recipient)


class BivaluedTwoChores(_TwoAgentController):
  """Allocate chores to two agents with bi-valued costs."""

  name = 'bivalued_two_chores'
  direction = Direction.CHORES

  def _base(self, view: ItemView) -> Decision:
    one_envies, two_envies = view.envies(1, 2), view.envies(2, 1)
    if not one_envies and not two_envies:
      high = self._high(1, view.value(1)), self._high(2, view.value(2))
      if high[0] == high[1]:
        return Decision.assign(1)
      return Decision.assign(2 if high[0] else 1)

    # Agent i does not envy, agent j does.
    j = 1 if one_envies else 2
    i = 3 - j
    cycle = (
      view.worth(j, j) > view.worth(j, i) + view.value(j)
      and view.worth(i, i) + view.value(i) > view.worth(i, j)
    )
    if not cycle:
      return Decision.assign(i)
    self._i, self._j = i, j
    self._enter(Mode.PBC, view.id)
    return self._preliminary(view)

  def _preliminary(self, view: ItemView) -> Decision:
    i, j = self._i, self._j
    if self._phase == 1:
      if len(view.allocation.bundle(j)) == 1:
        self._enter(Mode.BASE, view.id)
        return Decision.assign(j)
      self._phase = 2
      if self._high(i, view.value(i)):
        self._case = 1
        return Decision.assign(j)
      self._case = 2
      return Decision.assign(i)

    if self._case == 1:
      self._enter(Mode.BASE, view.id)
      return Decision.assign(i)
    if not self._high(j, view.value(j)):
      self._enter(Mode.BASE, view.id)
      return Decision.assign(j)
    self._enter(Mode.DBC, view.id)
    return Decision.assign(i)

  def _deep(self, view: ItemView) -> Decision:
    i, j = self._i, self._j
    high_i, high_j = self._high(i, view.value(i)), self._high(j, view.value(j))

    if self._phase == 1:
      self._phase = 2
      if not high_j and high_i:
        self._case = 1
      elif high_j and high_i:
        self._case = 2
      elif not high_j and not high_i:
        self._case = 3
      else:
        self._case = 4
        return Decision.assign(i)
      return Decision.assign(j)

    recipient = j
    if self._case == 2:
      if high_j:
        recipient, self._phase = i, 1
    elif self._case == 3:
      if not high_i:
        recipient, self._phase = i, 1
    elif self._case == 4:
      self._phase = 1
    if self._phase == 2:
      self._enter(Mode.BASE, view.id)
    return Decision.assign(recipient)

# ======================================================================================
# Binary Agents Plus One Bi-Valued Agent

class AdaptedPicking(Allocator):
  """
  Allocate goods to n - 1 agents with one identical binary valuation and agent
  n with a bi-valued valuation. Agent n's countable items are those the other
  agents value positively.
  """

  name = 'adapted_picking'

  def __init__(self, setting: Setting, *, strict: bool = True) -> None:
    super().__init__(setting, strict=strict)
    self._high_level = self._levels(setting.n)[1]

  def check_setting(self) -> None:
    n = self._setting.n
    self._require_direction(Direction.GOODS)
    self._require_agents(2, at_least=True)
    self._require_classes(lambda c: c.is_binary, 'binary valuations', range(1, n))
    self._require_classes(_is_leveled_bivalued, 'bi-valued levels', [n])

  def check_item(self, view: ItemView) -> None:
    super().check_item(view)
    n = self._setting.n
    if len({view.value(agent) for agent in range(1, n)}) > 1:
      raise ClassMismatch(f'{self.name} got e{view.id} with differing binary values')

  def decide(self, view: ItemView) -> Decision:
    n = self._setting.n
    bundle = view.allocation.bundle
    smallest = min(len(bundle(agent)) for agent in range(1, n))
    least = next(agent for agent in range(1, n) if len(bundle(agent)) == smallest)

    if view.value(least) == 0:
      return Decision.assign(n)
    countable = sum(1 for g in bundle(n) if view.value(least, g) > 0)
    if view.value(n) >= self._high_level:
      return Decision.assign(n if countable <= smallest else least)
    return Decision.assign(least if countable >= smallest else n)


class AdaptedChoresPicking(Allocator):
  """
  Allocate chores to n - 1 agents with binary costs and agent n with a
  bi-valued cost. Free chores go to the first agent with cost zero.
  """

  name = 'adapted_chores_picking'

  def __init__(self, setting: Setting, *, strict: bool = True) -> None:
    super().__init__(setting, strict=strict)
    self._low_level = self._levels(setting.n)[0]

  def check_setting(self) -> None:
    n = self._setting.n
    self._require_direction(Direction.CHORES)
    self._require_agents(2, at_least=True)
    self._require_classes(lambda c: c.is_binary, 'binary costs', range(1, n))
    self._require_classes(_is_leveled_bivalued, 'bi-valued levels', [n])

  def decide(self, view: ItemView) -> Decision:
    n = self._setting.n
    for agent in agents(n):
      if view.value(agent) == 0:
        return Decision.assign(agent)

    def burden(agent: int) -> int:
      return sum(1 for f in view.allocation.bundle(agent) if view.value(agent, f) > 0)

    burdens = {agent: burden(agent) for agent in range(1, n)}
    least = min(burdens, key=lambda agent: (burdens[agent], agent))
    count = len(view.allocation.bundle(n))
    if view.value(n) <= self._low_level:
      return Decision.assign(n if burdens[least] >= count else least)
    return Decision.assign(least if burdens[least] <= count else n)

# ======================================================================================
# Binary Chores, Monotone Chores

class CompelledGreedy(Allocator):
  """
  Give each chore to the first agent in priority order that incurs no cost,
  leaving the order alone. If every agent incurs cost, the first agent takes
  the chore and moves to the back of the order.
  """

  name = 'compelled_greedy'

  def __init__(
    self, setting: Setting, *, strict: bool = True, order: Optional[Sequence[int]] = None
  ) -> None:
    super().__init__(setting, strict=strict)
    self._order = _priority_order(setting.n, order)

  def check_setting(self) -> None:
    self._require_direction(Direction.CHORES)
    self._require_classes(lambda c: c.is_binary, 'binary costs')

  @property
  def order(self) -> tuple[int, ...]:
    return tuple(self._order)

  def decide(self, view: ItemView) -> Decision:
    for agent in self._order:
      if view.value(agent) == 0:
        return Decision.assign(agent)
    first = self._order.pop(0)
    self._order.append(first)
    return Decision.assign(first)


class RoundRobin(Allocator):
  """Give the k-th chore to agent ((k - 1) mod n) + 1."""

  name = 'round_robin'

  def check_setting(self) -> None:
    self._require_direction(Direction.CHORES)
    if self._strict and not self._setting.monotone:
      raise NotMonotone(f'{self.name} needs a monotone stream')

  def check_item(self, view: ItemView) -> None:
    pass

  def decide(self, view: ItemView) -> Decision:
    return Decision.assign((view.id - 1) % self._setting.n + 1)

# ======================================================================================
# Deadline One

class DeadlineMatching(Allocator):
  """
  Allocate goods or chores to two bi-valued agents when each item may wait one
  round. Odd arrivals are held; even arrivals are matched with the held item
  so that one goes to each agent.
  """

  name = 'deadline_matching'

  def __init__(self, setting: Setting, *, strict: bool = True) -> None:
    super().__init__(setting, strict=strict)
    self._levels_of = {agent: self._levels(agent) for agent in (1, 2)}
    self._phase = 1
    self._held: Optional[int] = None

  def check_setting(self) -> None:
    self._require_agents(2)
    if self._setting.deadline != 1:
      raise DeadlineUnsupported(f'{self.name} needs deadline 1, not {self._setting.deadline}')
    self._require_classes(_is_leveled_bivalued, 'bi-valued levels')

  @property
  def phase(self) -> int:
    return self._phase

  def _high(self, agent: int, value: Fraction) -> bool:
    return value >= self._levels_of[agent][1]

  def _roles(self, oracle: Oracle, allocation: Allocation) -> Optional[tuple[int, int]]:
    """
    Get agents i and j. For goods, i envies j; for chores, j envies i. Without
    envy, the result is ``None``.
    """
    one, two = envies(oracle, allocation, 1, 2), envies(oracle, allocation, 2, 1)
    if not one and not two:
      return None
    envier = 1 if one else 2
    if self._setting.direction is Direction.GOODS:
      return envier, 3 - envier
    return 3 - envier, envier

  def decide(self, view: ItemView) -> Decision:
    if self._phase == 1:
      self._phase = 2
      self._held = view.id
      return Decision.hold()

    assert self._held is not None
    first, second = self._held, view.id
    self._phase = 1
    self._held = None

    def v(agent: int, item: int) -> Fraction:
      return view.value(agent, item)

    roles = self._roles(view.oracle, view.allocation)
    i, j = roles or (1, 2)
    goods = self._setting.direction is Direction.GOODS

    if roles is not None:
      if goods:
        if self._high(i, v(i, first)):
          pair = i, j
        elif self._high(i, v(i, second)) or self._high(j, v(j, first)):
          pair = j, i
        else:
          pair = i, j
      else:
        if self._high(j, v(j, first)):
          pair = i, j
        elif self._high(j, v(j, second)) or self._high(i, v(i, first)):
          pair = j, i
        else:
          pair = i, j
    else:
      # For goods, agent i leads. For chores, agent j leads.
      lead, other = (i, j) if goods else (j, i)
      if v(lead, first) != v(lead, second):
        pair = (i, j) if v(lead, first) > v(lead, second) else (j, i)
      elif v(other, first) > v(other, second):
        pair = j, i
      else:
        pair = i, j

    return Decision.assign(pair[1], release=pair[0])

  def flush(self, allocation: Allocation, oracle: Oracle) -> Optional[int]:
    held = allocation.held
    if held is None:
      return None
    self._phase = 1
    self._held = None
    roles = self._roles(oracle, allocation)
    if roles is None:
      return 1
    i, j = roles
    if self._setting.direction is Direction.GOODS:
      return i if self._high(i, oracle.singleton(i, held)) else j
    return i if self._high(j, oracle.singleton(j, held)) else j

# ======================================================================================

class Replay(Allocator):
  """
  Replay recorded decisions. For deadline streams, one extra trailing
  assignment names the recipient of the item held at the end.
  """

  name = 'replay'

  def __init__(
    self,
    setting: Setting,
    *,
    strict: bool = True,
    decisions: Sequence[Decision] = (),
  ) -> None:
    super().__init__(setting, strict=strict)
    self._decisions = tuple(decisions)
    self._position = 0

  def check_item(self, view: ItemView) -> None:
    pass

  def _next(self, what: str) -> Decision:
    if self._position >= len(self._decisions):
      raise ConfigError(f'recorded decisions run out at {what}')
    decision = self._decisions[self._position]
    self._position += 1
    return decision

  def decide(self, view: ItemView) -> Decision:
    return self._next(f'e{view.id}')

  def flush(self, allocation: Allocation, oracle: Oracle) -> Optional[int]:
    if allocation.held is None:
      return None
    decision = self._next(f'flush of e{allocation.held}')
    if not decision.is_assign or decision.agent is None:
      raise ConfigError(f'recorded flush {decision} is not an assignment')
    return decision.agent


ALLOCATORS: dict[str, type[Allocator]] = {
  cls.name: cls for cls in (
    GreedyNW,
    MarginalGreedy,
    BivaluedTwoGoods,
    BivaluedTwoChores,
    AdaptedPicking,
    CompelledGreedy,
    AdaptedChoresPicking,
    DeadlineMatching,
    RoundRobin,
    Replay,
  )
}

def create_allocator(name: str, setting: Setting, strict: bool = True, **params: Any) -> Allocator:
  """
  Create the named allocator for the setting.

  :raises ConfigError: indicates an unknown name or unknown parameters.
  """
  try:
    cls = ALLOCATORS[name]
  except KeyError:
    raise ConfigError(
      f'unknown algorithm "{name}"; choose from {", ".join(sorted(ALLOCATORS))}'
    ) from None
  try:
    return cls(setting, strict=strict, **params)
  except TypeError as x:
    raise ConfigError(f'bad parameters for {name}: {x}') from x
