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
Adaptive adversaries and an exhaustive game solver. An :py:class:`Adversary`
chooses the next item, or ends the stream, as a pure function of the
decisions made so far. Since the adversary is deterministic, it defines a
finite game tree over the decisions of any deterministic online algorithm, and
:py:func:`solve_game` finds the best final ratio any such algorithm can
guarantee, together with a decision path attaining it. A value below 1 for
goods or above 1 for chores certifies that no online algorithm can be exact.

The builtin adversaries are registered by name, see
:py:func:`builtin_adversary`. Most are :py:class:`TreeAdversary` instances:
explicit case trees whose missing branches end the stream. Forced moves, where
one choice already loses, are encoded that way, i.e., the losing choice simply
stops the stream. The trees for matroid valuations ship as JSON data files.
"""

from __future__ import annotations

import abc
import dataclasses
import importlib.resources
import json

from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, Union

from fairstream.algorithms import Allocator, create_allocator, ItemView, Setting
from fairstream.audit import Bound, check_nw, Metric
from fairstream.config import DEFAULT_EPSILON, enumeration_budget
from fairstream.core import (
  Allocation,
  agents,
  apply_decision,
  Decision,
  DecisionKind,
  Direction,
  flush_held,
  Item,
  Ratio,
  Representation,
  Stream,
)
from fairstream.error import (
  BudgetExceeded,
  ConfigError,
  UnknownAdversary,
)
from fairstream.serde import format_rational
from fairstream.validator import Validator
from fairstream.valuations import (
  ExplicitSetFunction,
  Oracle,
  oracle_for,
  ValuationClass,
  ValuationKind,
)

__all__ = [
  'Adversary',
  'Node',
  'TreeAdversary',
  'LayeredAdversary',
  'StreamAdversary',
  'GameValue',
  'Playthrough',
  'Step',
  'unfold',
  'BUILTIN_ADVERSARIES',
  'builtin_adversary',
  'load_tree',
  'solve_game',
  'game_value_at_epsilon',
  'replay_path',
  'play',
  'game_tree',
  'verify_marginals',
]

class Adversary(abc.ABC):
  """An adaptive source of items."""

  def __init__(
    self,
    name: str,
    direction: Direction,
    n: int,
    *,
    representation: Representation = Representation.ADDITIVE,
    profile: Sequence[ValuationClass] = (),
    epsilon: Optional[Fraction] = None,
  ) -> None:
    self._name = name
    self._direction = direction
    self._n = n
    self._representation = representation
    self._profile = tuple(profile)
    self._epsilon = epsilon

  @property
  def name(self) -> str:
    return self._name

  @property
  def direction(self) -> Direction:
    return self._direction

  @property
  def n(self) -> int:
    return self._n

  @property
  def representation(self) -> Representation:
    return self._representation

  @property
  def profile(self) -> tuple[ValuationClass, ...]:
    """The valuation classes the emitted items respect."""
    return self._profile

  @property
  def epsilon(self) -> Optional[Fraction]:
    return self._epsilon

  @property
  def is_complete(self) -> bool:
    """Whether decision paths must be complete, i.e., never discard."""
    return self._direction is Direction.CHORES

  @abc.abstractmethod
  def next(self, history: Sequence[Decision]) -> Optional[Item]:
    """Get the next item after the given decisions or ``None`` to stop."""

  def oracle(self, items: Sequence[Item]) -> Oracle:
    """Build the oracle for the emitted items."""
    return oracle_for(self._direction, self._n, items, self._representation)

  @property
  def deadline(self) -> int:
    """The deadline; adaptive adversaries always require immediate decisions."""
    return 0

  def empty(self) -> Allocation:
    """Get the empty allocation the game starts from."""
    return Allocation.empty(self._n, self._direction, self.deadline)

  def setting(self) -> Setting:
    """Get the setting an allocator playing against this adversary sees."""
    return Setting(self._direction, self._n, self.deadline, self._profile)

  def moves(self) -> tuple[Decision, ...]:
    """Get the decisions available for every item."""
    assigns = tuple(Decision.assign(agent) for agent in agents(self._n))
    return assigns if self.is_complete else assigns + (Decision.discard(),)

  def replay(self, history: Sequence[Decision]) -> Optional[tuple[Allocation, tuple[Item, ...]]]:
    """
    Fold the decisions into an allocation, returning ``None`` if the stream
    stops before the last decision.
    """
    allocation = self.empty()
    items: list[Item] = []
    for index, decision in enumerate(history):
      item = self.next(history[:index])
      if item is None:
        return None
      items.append(item)
      allocation = apply_decision(allocation, item, decision)
    return allocation, tuple(items)

  def describe(self) -> dict[str, Any]:
    return {
      'name': self._name,
      'direction': self._direction.value,
      'n': self._n,
      'representation': self._representation.value,
      'classes': [str(c) for c in self._profile],
      'epsilon': self._epsilon,
    }

# --------------------------------------------------------------------------------------
# Case Trees

@dataclasses.dataclass(frozen=True, eq=False)
class Node:
  """A node of a case tree: the item's row and the branches continuing."""

  row: tuple[Any, ...] = ()
  """Per-agent values, costs, or category labels; empty for explicit items."""

  next: Mapping[str, Node] = dataclasses.field(default_factory=dict)
  """The successors keyed by ``"1"`` through ``"n"`` and ``"discard"``."""

  marginals: Optional[tuple[Fraction, ...]] = None
  """The expected marginals against the agents' bundles on arrival."""


def _node(row: Sequence[Any], branches: Optional[Mapping[str, Node]] = None) -> Node:
  return Node(tuple(row), dict(branches or {}))


class TreeAdversary(Adversary):
  """
  An adversary following a case tree. With ``mirror``, the tree only spells
  out the branch where agent 1 receives the first item. If agent 2 receives
  it, the adversary plays the same tree with the agents' roles swapped.
  """

  def __init__(
    self,
    name: str,
    direction: Direction,
    n: int,
    root: Node,
    *,
    mirror: bool = False,
    representation: Representation = Representation.ADDITIVE,
    profile: Sequence[ValuationClass] = (),
    epsilon: Optional[Fraction] = None,
    function: Optional[Callable[[int, frozenset[int]], Fraction]] = None,
  ) -> None:
    super().__init__(
      name, direction, n, representation=representation, profile=profile, epsilon=epsilon)
    if mirror and n != 2:
      raise ValueError('only two-agent trees can be mirrored')
    if representation is Representation.EXPLICIT and function is None:
      raise ValueError('explicit trees need a set function')
    self._root = root
    self._mirror = mirror
    self._function = function

  @property
  def root(self) -> Node:
    return self._root

  @property
  def mirror(self) -> bool:
    return self._mirror

  def _swapped(self, history: Sequence[Decision]) -> bool:
    return (
      self._mirror and len(history) > 0
      and history[0].kind is DecisionKind.ASSIGN and history[0].agent == 2
    )

  @staticmethod
  def _key(decision: Decision, swapped: bool) -> str:
    if decision.kind is DecisionKind.ASSIGN:
      assert decision.agent is not None
      return str(3 - decision.agent if swapped else decision.agent)
    return decision.kind.value

  def node_at(self, history: Sequence[Decision]) -> Optional[Node]:
    """Get the node for the item after the decisions, in canonical orientation."""
    swapped = self._swapped(history)
    node: Optional[Node] = self._root
    for decision in history:
      assert node is not None
      node = node.next.get(self._key(decision, swapped))
      if node is None:
        return None
    return node

  def next(self, history: Sequence[Decision]) -> Optional[Item]:
    node = self.node_at(history)
    if node is None:
      return None
    row = tuple(reversed(node.row)) if self._swapped(history) else node.row
    ordinal = len(history) + 1
    if self.representation is Representation.ADDITIVE:
      return Item(ordinal, values=row)
    if self.representation is Representation.MATROID:
      return Item(ordinal, categories=row)
    return Item(ordinal)

  def expected_marginals(self, history: Sequence[Decision]) -> Optional[tuple[Fraction, ...]]:
    """Get the recorded marginals for the item after the decisions, if any."""
    node = self.node_at(history)
    if node is None or node.marginals is None:
      return None
    return tuple(reversed(node.marginals)) if self._swapped(history) else node.marginals

  def oracle(self, items: Sequence[Item]) -> Oracle:
    if self.representation is Representation.EXPLICIT:
      assert self._function is not None
      return ExplicitSetFunction(
        self.direction, self.n, (item.id for item in items), self._function)
    return super().oracle(items)


class LayeredAdversary(Adversary):
  """
  The tri-valued construction for n >= 2 agents. The first n - 2 items are
  worth 1/ε to everyone, item n - 1 is worth 1, item n singles out one agent,
  and item n + 1 is worth 1/ε again. Each of the first n items must go to an
  agent without items, or else the stream stops. For goods, item n is worth
  1/ε to the holder of item n - 1 and ε to all others. For chores, it costs
  1/ε to the one agent still without items and ε to all others.
  """

  def __init__(self, name: str, direction: Direction, n: int, epsilon: Fraction) -> None:
    if n < 2:
      raise ConfigError(f'{name} needs at least 2 agents, not {n}')
    levels = ValuationClass.trivalued(epsilon, Fraction(1), 1 / epsilon)
    super().__init__(name, direction, n, profile=[levels] * n, epsilon=epsilon)

  def next(self, history: Sequence[Decision]) -> Optional[Item]:
    n = self.n
    ordinal = len(history) + 1
    if ordinal > n + 1:
      return None
    state = self.replay(history)
    if state is None:
      return None
    allocation, _ = state
    if allocation.discarded or any(len(b) > 1 for b in allocation.bundles):
      return None

    epsilon = self.epsilon
    assert epsilon is not None
    high, one = 1 / epsilon, Fraction(1)
    if ordinal <= n - 2 or ordinal == n + 1:
      row = (high,) * n
    elif ordinal == n - 1:
      row = (one,) * n
    elif self.direction is Direction.GOODS:
      holder = allocation.owner(n - 1)
      row = tuple(high if agent == holder else epsilon for agent in agents(n))
    else:
      empty = next(a for a in agents(n) if not allocation.bundle(a))
      row = tuple(high if agent == empty else epsilon for agent in agents(n))
    return Item(ordinal, values=row)


class StreamAdversary(Adversary):
  """
  A non-adaptive adversary that plays a fixed stream. Its setting is the
  stream's, with undeclared classes determined from the entire stream.
  """

  def __init__(self, stream: Stream, name: str = 'stream') -> None:
    if stream.representation is Representation.EXPLICIT:
      raise ConfigError('explicit streams cannot be played')
    setting = Setting.for_stream(stream)
    super().__init__(
      name, stream.direction, stream.n,
      representation=stream.representation, profile=setting.profile,
    )
    self._stream = stream
    self._setting = setting

  @property
  def stream(self) -> Stream:
    return self._stream

  @property
  def deadline(self) -> int:
    return self._stream.deadline

  def setting(self) -> Setting:
    return self._setting

  def next(self, history: Sequence[Decision]) -> Optional[Item]:
    index = len(history)
    return self._stream.items[index] if index < self._stream.length else None

# --------------------------------------------------------------------------------------
# Case Tree Files

def _parse_node(
  validator: Validator[Any], representation: Representation, n: int
) -> Node:
  node = validator.to_object({'row', 'marginals', 'next'})
  row: tuple[Any, ...] = ()
  if representation is Representation.MATROID:
    row = node['row'].to_labels(n)
  elif representation is not Representation.EXPLICIT:
    row = node['row'].to_row(n)

  marginals = node.optional('marginals')
  branches: dict[str, Node] = {}
  successors = node.optional('next')
  if successors is not None:
    children = successors.to_object({str(agent) for agent in agents(n)} | {'discard'})
    for key in children.value:
      branches[key] = _parse_node(children[key], representation, n)
  return Node(row, branches, None if marginals is None else marginals.to_row())

def parse_tree(data: object, filename: str) -> TreeAdversary:
  """
  Parse a case tree from its JSON representation.

  :raises ValidationError: indicates a malformed tree.
  """
  document = Validator(data, filename=filename).to_object(
    {'name', 'direction', 'n', 'representation', 'mirror', 'classes', 'comment', 'tree'})
  name = document['name'].to_string().value
  direction = document['direction'].to_enum(Direction)
  n = document['n'].to_integer().value
  if n < 1:
    document['n'].raise_invalid('is not positive')
  representation = document['representation'].to_enum(
    Representation, (Representation.ADDITIVE, Representation.MATROID))
  mirror = document.optional('mirror')
  classes = document.optional('classes')
  profile: tuple[ValuationClass, ...] = ()
  if classes is not None:
    profile = tuple(
      ValuationClass.parse(c.to_string().value) for c in classes.to_list(allow_empty=True).items())
  root = _parse_node(document['tree'], representation, n)
  return TreeAdversary(
    name, direction, n, root,
    mirror=False if mirror is None else mirror.to_boolean().value,
    representation=representation, profile=profile,
  )

def load_tree(source: Union[str, Path]) -> TreeAdversary:
  """
  Load a case tree. A plain name refers to one of the trees shipped with this
  package, anything else to a file.

  :raises ValidationError: indicates a malformed tree.
  """
  if isinstance(source, str) and '/' not in source and not source.endswith('.json'):
    resource = importlib.resources.files('fairstream') / 'data' / f'{source}.json'
    return parse_tree(json.loads(resource.read_text(encoding='utf8')), f'{source}.json')
  path = Path(source)
  with open(path, mode='r', encoding='utf8') as file:
    return parse_tree(json.load(file), str(path))

# --------------------------------------------------------------------------------------
# Builtin Adversaries

def _check_epsilon(epsilon: Fraction) -> Fraction:
  epsilon = Fraction(epsilon)
  if not 0 < epsilon < 1:
    raise ConfigError(f'ε={format_rational(epsilon)} is not strictly between 0 and 1')
  return epsilon

def _bivalued(a: Fraction, b: Fraction) -> ValuationClass:
  return ValuationClass.bivalued(a, b)

def _bivalued_goods(epsilon: Fraction) -> TreeAdversary:
  e, one = epsilon, Fraction(1)
  root = _node((e, e), {
    '1': _node((one, e), {
      '2': _node((e, e), {
        '1': _node((one, one)),
        '2': _node((e, one), {
          '1': _node((one, one)),
        }),
      }),
    }),
  })
  return TreeAdversary(
    'bivalued_goods', Direction.GOODS, 2, root,
    mirror=True, profile=[_bivalued(e, one)] * 2, epsilon=epsilon,
  )

def _bivalued_goods_usw(epsilon: Fraction) -> TreeAdversary:
  e, one = epsilon, Fraction(1)
  root = _node((one, e), {
    '1': _node((1 / e, e * e)),
  })
  profile = [_bivalued(one, 1 / e), _bivalued(e * e, e)]
  return TreeAdversary(
    'bivalued_goods_usw', Direction.GOODS, 2, root, profile=profile, epsilon=epsilon)

def _binbi_goods_usw(epsilon: Fraction) -> TreeAdversary:
  e, one = epsilon, Fraction(1)
  root = _node((one, e), {
    '1': _node((one, e * e), {
      '2': _node((one, e)),
    }),
  })
  profile = [ValuationClass.binary(), _bivalued(e * e, e)]
  return TreeAdversary(
    'binbi_goods_usw', Direction.GOODS, 2, root, profile=profile, epsilon=epsilon)

def _bivalued_chores(epsilon: Fraction, name: str = 'bivalued_chores') -> TreeAdversary:
  high, one = 1 / epsilon, Fraction(1)
  root = _node((one, one), {
    '1': _node((one, high), {
      '2': _node((high, high), {
        '1': _node((one, high), {
          '2': _node((high, high)),
        }),
      }),
    }),
  })
  return TreeAdversary(
    name, Direction.CHORES, 2, root,
    mirror=True, profile=[_bivalued(one, high)] * 2, epsilon=epsilon,
  )

def _bivalued_chores_mms(epsilon: Fraction) -> TreeAdversary:
  one, two = Fraction(1), Fraction(2)
  root = _node((one, one), {
    '1': _node((one, one), {
      '2': _node((two, two)),
    }),
  })
  return TreeAdversary(
    'bivalued_chores_mms', Direction.CHORES, 2, root,
    mirror=True, profile=[_bivalued(one, two)] * 2,
  )

def _chores_usc(name: str, first: ValuationClass, epsilon: Fraction) -> TreeAdversary:
  high, one = 1 / epsilon, Fraction(1)
  root = _node((one, high), {
    '1': _node((one, high * high)),
  })
  profile = [first, _bivalued(high, high * high)]
  return TreeAdversary(name, Direction.CHORES, 2, root, profile=profile, epsilon=epsilon)

def _identical_goods(epsilon: Fraction) -> TreeAdversary:
  e, one = epsilon, Fraction(1)
  root = _node((one, one), {
    '1': _node((one, e), {
      '2': _node((e, e), {
        '1': _node((one, e), {
          '2': _node((one, one)),
        }),
        '2': _node((one, one)),
      }),
    }),
  })
  return TreeAdversary(
    'identical_pref', Direction.GOODS, 2, root,
    mirror=True, profile=[_bivalued(e, one)] * 2, epsilon=epsilon,
  )

def _nonbinary_submodular(bundle: frozenset[int]) -> Fraction:
  if 4 in bundle:
    return Fraction(6)
  if 3 in bundle or len(bundle) == 2:
    return Fraction(5)
  return Fraction(3) if bundle else Fraction(0)

def _submodular_nw(epsilon: Fraction) -> TreeAdversary:
  root = _node((), {
    '1': _node((), {
      '1': _node((), {
        '2': _node(()),
      }),
      '2': _node(()),
    }),
  })
  return TreeAdversary(
    'submodular_nw', Direction.GOODS, 2, root,
    mirror=True,
    representation=Representation.EXPLICIT,
    profile=[ValuationClass(ValuationKind.SET_FUNCTION)] * 2,
    function=lambda agent, bundle: _nonbinary_submodular(bundle),
  )


AdversaryFactory = Callable[[Fraction, Optional[Direction], Optional[int]], Adversary]

BUILTIN_ADVERSARIES: dict[str, AdversaryFactory] = {
  'trivalued_goods_2':
    lambda e, d, n: LayeredAdversary('trivalued_goods_2', Direction.GOODS, 2, e),
  'trivalued_goods_n':
    lambda e, d, n: LayeredAdversary('trivalued_goods_n', Direction.GOODS, n or 3, e),
  'submodbin_fairness': lambda e, d, n: load_tree('submodbin_fairness'),
  'submodbin_usw': lambda e, d, n: load_tree('submodbin_usw'),
  'bivalued_goods': lambda e, d, n: _bivalued_goods(e),
  'bivalued_goods_usw': lambda e, d, n: _bivalued_goods_usw(e),
  'binbi_goods_usw': lambda e, d, n: _binbi_goods_usw(e),
  'trivalued_chores_2':
    lambda e, d, n: LayeredAdversary('trivalued_chores_2', Direction.CHORES, 2, e),
  'trivalued_chores_n':
    lambda e, d, n: LayeredAdversary('trivalued_chores_n', Direction.CHORES, n or 3, e),
  'supermod_ef1': lambda e, d, n: load_tree('supermod_ef1'),
  'supermod_mms_usc': lambda e, d, n: load_tree('supermod_mms_usc'),
  'bivalued_chores': lambda e, d, n: _bivalued_chores(e),
  'bivalued_chores_mms': lambda e, d, n: _bivalued_chores_mms(e),
  'bivalued_chores_usc': lambda e, d, n: _chores_usc(
    'bivalued_chores_usc', _bivalued(Fraction(1), Fraction(2)), e),
  'binbi_chores_usc': lambda e, d, n: _chores_usc(
    'binbi_chores_usc', ValuationClass.binary(), e),
  'identical_pref': lambda e, d, n: (
    _bivalued_chores(e, 'identical_pref') if d is Direction.CHORES else _identical_goods(e)),
  'submodular_nw': lambda e, d, n: _submodular_nw(e),
}

def builtin_adversary(
  name: str,
  epsilon: Fraction = DEFAULT_EPSILON,
  direction: Optional[Direction] = None,
  n: Optional[int] = None,
) -> Adversary:
  """
  Create the named builtin adversary. The direction only selects between the
  goods and chores variants of ``identical_pref``; the agent count only
  applies to the ``_n`` constructions, which default to three agents.

  :raises UnknownAdversary: indicates an unknown name.
  :raises ConfigError: indicates ε outside (0, 1).
  """
  try:
    factory = BUILTIN_ADVERSARIES[name]
  except KeyError:
    raise UnknownAdversary(
      f'unknown adversary "{name}"; choose from {", ".join(sorted(BUILTIN_ADVERSARIES))}'
    ) from None
  return factory(_check_epsilon(epsilon), direction, n)

# --------------------------------------------------------------------------------------
# Games

@dataclasses.dataclass(frozen=True)
class GameValue:
  """
  The value of an adversary's game: the best final metric over all legal
  decision paths, maximized for goods and minimized for chores.
  """

  metric: Metric
  value: Optional[Ratio]
  """The game value or ``None`` if no decision path is legal."""
  witness: tuple[Decision, ...]
  """The first decision path attaining the value."""
  explored: int = 0
  """The number of tree nodes visited."""
  legal: int = 0
  """The number of legal complete decision paths."""

  def to_dict(self) -> dict[str, Any]:
    return {
      'metric': self.metric.value,
      'value': self.value,
      'witness': [d.to_dict() for d in self.witness],
      'explored': self.explored,
      'legal': self.legal,
    }


def _better(value: Ratio, best: Optional[Ratio], direction: Direction) -> bool:
  if best is None:
    return True
  return value > best if direction is Direction.GOODS else value < best

def solve_game(
  adversary: Adversary,
  metric: Metric,
  guard: Optional[Bound] = None,
  budget: Optional[int] = None,
) -> GameValue:
  """
  Solve the adversary's game for the metric. For goods, a decision path is
  legal if its final allocation is non-wasteful. For chores, a decision path
  is legal if it is complete, i.e., never discards. With a guard, a legal path
  must also meet the guard's bound at the end.

  :raises ClassMismatch: indicates a welfare metric for the wrong direction.
  :raises BudgetExceeded: indicates a tree with more nodes than the budget.
  """
  direction = adversary.direction
  metric.check(direction)
  if guard is not None:
    guard.metric.check(direction)
  limit = enumeration_budget(budget)
  moves = adversary.moves()

  best: Optional[Ratio] = None
  witness: tuple[Decision, ...] = ()
  explored = 0
  legal = 0

  def visit(history: tuple[Decision, ...], allocation: Allocation, items: tuple[Item, ...]) -> None:
    nonlocal best, witness, explored, legal
    explored += 1
    if explored > limit:
      raise BudgetExceeded(f'game of {adversary.name} has more than {limit:,} nodes')

    item = adversary.next(history)
    if item is not None:
      for move in moves:
        visit(history + (move,), apply_decision(allocation, item, move), items + (item,))
      return

    oracle = adversary.oracle(items)
    if direction is Direction.GOODS and not check_nw(allocation, oracle):
      return
    if guard is not None and not guard.holds(guard.metric.measure(allocation, oracle, budget)):
      return
    legal += 1
    value = metric.measure(allocation, oracle, budget)
    if _better(value, best, direction):
      best, witness = value, history

  visit((), adversary.empty(), ())
  return GameValue(metric, best, witness, explored, legal)

def game_value_at_epsilon(
  name: str,
  metric: Metric,
  epsilon: Fraction = DEFAULT_EPSILON,
  guard: Optional[Bound] = None,
  direction: Optional[Direction] = None,
  n: Optional[int] = None,
) -> Optional[Ratio]:
  """Solve the named builtin adversary's game at the given ε."""
  return solve_game(builtin_adversary(name, epsilon, direction, n), metric, guard).value

# --------------------------------------------------------------------------------------
# Playing Adversaries

@dataclasses.dataclass(frozen=True)
class Playthrough:
  """The outcome of playing decisions against an adversary."""
  allocation: Allocation
  items: tuple[Item, ...]
  decisions: tuple[Decision, ...]
  oracle: Oracle
  finished: bool
  """Whether the adversary stopped the stream."""


def replay_path(adversary: Adversary, decisions: Sequence[Decision]) -> Playthrough:
  """
  Replay a decision path, e.g., a game witness, against the adversary.

  :raises ConfigError: indicates decisions after the stream has stopped.
  """
  history = tuple(decisions)
  state = adversary.replay(history)
  if state is None:
    raise ConfigError(f'{adversary.name} stops before all {len(history)} decisions')
  allocation, items = state
  finished = adversary.next(history) is None
  return Playthrough(allocation, items, history, adversary.oracle(items), finished)

@dataclasses.dataclass(frozen=True)
class Step:
  """One round of live play."""
  item: Optional[Item]
  """The arriving item or ``None`` for the final flush of a held item."""
  decision: Decision
  allocation: Allocation
  """The allocation after the decision."""
  oracle: Oracle
  """The oracle over all items arrived so far."""


def unfold(adversary: Adversary, allocator: Allocator) -> Iterator[Step]:
  """
  Play the allocator against the adversary, yielding one step per round and
  a last step for flushing the held item, if any.
  """
  allocation = adversary.empty()
  items: list[Item] = []
  history: list[Decision] = []
  while True:
    item = adversary.next(history)
    if item is None:
      break
    items.append(item)
    oracle = adversary.oracle(items)
    decision = allocator.step(ItemView(item, allocation, oracle))
    allocation = apply_decision(allocation, item, decision)
    history.append(decision)
    yield Step(item, decision, allocation, oracle)

  oracle = adversary.oracle(items)
  recipient = allocator.flush(allocation, oracle)
  if recipient is not None:
    yield Step(None, Decision.assign(recipient), flush_held(allocation, recipient), oracle)

def play(adversary: Adversary, allocator: Union[str, Allocator]) -> Playthrough:
  """
  Play an allocator against the adversary until the adversary stops. An
  allocator given by name is created in non-strict mode, since adversarial
  items often fall outside its admissible class.
  """
  if isinstance(allocator, str):
    allocator = create_allocator(allocator, adversary.setting(), strict=False)

  allocation = adversary.empty()
  items: list[Item] = []
  decisions: list[Decision] = []
  oracle = adversary.oracle(())
  for step in unfold(adversary, allocator):
    if step.item is not None:
      items.append(step.item)
      decisions.append(step.decision)
    allocation, oracle = step.allocation, step.oracle
  return Playthrough(allocation, tuple(items), tuple(decisions), oracle, True)

def game_tree(adversary: Adversary, budget: Optional[int] = None) -> dict[str, Any]:
  """
  Export the adversary's full game tree. Inner nodes show the item and the
  agents' marginals on arrival; leaves show the final allocation.

  :raises BudgetExceeded: indicates a tree with more nodes than the budget.
  """
  limit = enumeration_budget(budget)
  moves = adversary.moves()
  count = 0

  def visit(history: tuple[Decision, ...], allocation: Allocation, items: tuple[Item, ...]) -> dict[str, Any]:
    nonlocal count
    count += 1
    if count > limit:
      raise BudgetExceeded(f'game of {adversary.name} has more than {limit:,} nodes')
    item = adversary.next(history)
    if item is None:
      return { 'allocation': allocation.to_dict() }
    arrived = items + (item,)
    oracle = adversary.oracle(arrived)
    return {
      'item': item.to_dict(),
      'marginals': [
        oracle.marginal(agent, allocation.bundle(agent), item.id)
        for agent in agents(adversary.n)
      ],
      'moves': {
        str(move): visit(history + (move,), apply_decision(allocation, item, move), arrived)
        for move in moves
      },
    }

  return {
    'adversary': adversary.describe(),
    'tree': visit((), adversary.empty(), ()),
  }

def verify_marginals(adversary: TreeAdversary) -> list[str]:
  """
  Check every recorded marginal in a case tree against the oracle. The result
  lists the mismatches and is empty for a consistent tree.
  """
  problems: list[str] = []
  moves = adversary.moves()

  def visit(history: tuple[Decision, ...], allocation: Allocation, items: tuple[Item, ...]) -> None:
    item = adversary.next(history)
    if item is None:
      return
    arrived = items + (item,)
    expected = adversary.expected_marginals(history)
    if expected is not None:
      oracle = adversary.oracle(arrived)
      actual = tuple(
        oracle.marginal(agent, allocation.bundle(agent), item.id)
        for agent in agents(adversary.n)
      )
      if actual != expected:
        path = ' '.join(str(d) for d in history) or 'start'
        problems.append(f'e{item.id} after {path}: expected {expected}, got {actual}')
    for move in moves:
      visit(history + (move,), apply_decision(allocation, item, move), arrived)

  visit((), adversary.empty(), ())
  return problems
