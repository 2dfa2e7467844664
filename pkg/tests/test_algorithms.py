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

import pytest
import random

from fractions import Fraction

from fairstream.adversaries import StreamAdversary, unfold
from fairstream.algorithms import (
  ALLOCATORS,
  create_allocator,
  ItemView,
  Mode,
  Setting,
  Transition,
)
from fairstream.audit import audit_round, envies, Metric
from fairstream.config import seed_count
from fairstream.core import Allocation, Decision, Direction
from fairstream.error import (
  ClassMismatch, ConfigError, DeadlineUnsupported, NotMonotone, WrongAgentCount
)
from fairstream.generators import Family, generate, GeneratorSpec, Order
from fairstream.harness import run
from fairstream.valuations import oracle_for_stream

from .instances import additive, matroid

BI_1_5 = ('bivalued(1,5)', 'bivalued(1,5)')

def decisions(stream, name, **params):
  report = run(stream, name, params=params, audit=False, timing=False)
  return [str(record.decision) for record in report.records]

def first_view(stream):
  oracle = oracle_for_stream(stream, 1)
  return ItemView(stream.items[0], Allocation.for_stream(stream), oracle)

# --------------------------------------------------------------------------------------

def test_greedy_nw():
  stream = additive(Direction.GOODS, [(1, 1), (1, 0), (0, 0)])
  assert decisions(stream, 'greedy_nw') == ['Assign(1)', 'Assign(1)', 'Discard']

  stream = additive(Direction.GOODS, [(0, 1)])
  assert decisions(stream, 'greedy_nw') == ['Assign(2)']

  stream = matroid(Direction.GOODS, [('a', 'a'), ('a', 'b')])
  assert decisions(stream, 'greedy_nw') == ['Assign(1)', 'Assign(2)']

def test_marginal_greedy():
  stream = additive(Direction.GOODS, [(1, 1), (1, 1), (1, 1)])
  setting = Setting.for_stream(stream)
  allocator = create_allocator('marginal_greedy', setting)
  assert allocator.order == (1, 2)
  report = run(stream, allocator, audit=False, timing=False)
  assert [str(r.decision) for r in report.records] == ['Assign(1)', 'Assign(2)', 'Assign(1)']
  assert allocator.order == (2, 1)

  stream = additive(Direction.GOODS, [(1, 0), (0, 0)])
  allocator = create_allocator('marginal_greedy', Setting.for_stream(stream), order=(2, 1))
  report = run(stream, allocator, audit=False, timing=False)
  assert [str(r.decision) for r in report.records] == ['Assign(1)', 'Discard']
  assert allocator.order == (2, 1)

  stream = matroid(Direction.GOODS, [('a', 'a'), ('a', 'b'), ('b', 'b')])
  assert decisions(stream, 'marginal_greedy') == ['Assign(1)', 'Assign(2)', 'Assign(1)']

def test_marginal_greedy_monotone():
  stream = additive(Direction.GOODS, [(3, 1), (2, 4), (1, 7)], monotone=True)
  assert decisions(stream, 'marginal_greedy', monotone=True) == [
    'Assign(1)', 'Assign(2)', 'Assign(1)']

  stream = additive(Direction.GOODS, [(3, 1), (5, 4), (1, 7)])
  with pytest.raises(NotMonotone):
    create_allocator('marginal_greedy', Setting.for_stream(stream), monotone=True)
  with pytest.raises(ClassMismatch):
    create_allocator('marginal_greedy', Setting.for_stream(stream))

def test_compelled_greedy():
  stream = additive(Direction.CHORES, [(0, 1), (1, 1), (1, 1)])
  allocator = create_allocator('compelled_greedy', Setting.for_stream(stream))
  orders = []
  for step in unfold(StreamAdversary(stream), allocator):
    orders.append(allocator.order)
  assert orders == [(1, 2), (2, 1), (1, 2)]
  assert step.allocation.bundles == (frozenset({ 1, 2 }), frozenset({ 3 }))
  assert audit_round(step.allocation, step.oracle).ef1 == 1

def test_round_robin():
  stream = additive(Direction.CHORES, [(1, 2), (2, 3), (3, 3), (4, 5)], monotone=True)
  assert decisions(stream, 'round_robin') == [
    'Assign(1)', 'Assign(2)', 'Assign(1)', 'Assign(2)']

  stream = additive(Direction.CHORES, [(1, 2), (3, 1), (2, 3)])
  with pytest.raises(NotMonotone):
    create_allocator('round_robin', Setting.for_stream(stream))
  assert create_allocator('round_robin', Setting.for_stream(stream), strict=False)

# --------------------------------------------------------------------------------------

def test_bivalued_two_goods_first_items():
  stream = additive(Direction.GOODS, [(5, 1)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_goods') == ['Assign(1)']
  stream = additive(Direction.GOODS, [(1, 5)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_goods') == ['Assign(2)']
  stream = additive(Direction.GOODS, [(1, 1)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_goods') == ['Assign(1)']

def test_bivalued_two_goods_trace():
  rows = [(5, 5), (5, 1), (1, 1), (1, 1), (1, 1), (1, 5)]
  stream = additive(Direction.GOODS, rows, profile=BI_1_5)
  allocator = create_allocator('bivalued_two_goods', Setting.for_stream(stream))

  seen = []
  for step in unfold(StreamAdversary(stream), allocator):
    seen.append((str(step.decision), allocator.mode))
    if step.item.id == 5:
      assert (allocator.phase, allocator.case, allocator.pair) == (2, 2, (2, 1))

  assert seen == [
    ('Assign(1)', Mode.BASE),
    ('Assign(2)', Mode.BASE),
    ('Assign(1)', Mode.BASE),
    ('Assign(2)', Mode.BASE),
    ('Assign(2)', Mode.PBC),
    ('Assign(2)', Mode.DBC),
  ]
  assert allocator.transitions == (
    Transition(3, Mode.BASE, Mode.PBC, 2, 1),
    Transition(3, Mode.PBC, Mode.BASE, 2, 1),
    Transition(5, Mode.BASE, Mode.PBC, 2, 1),
    Transition(6, Mode.PBC, Mode.DBC, 2, 1),
  )

def test_bivalued_two_goods_needs_both_envies_for_cycle():
  # Agent 2 still envies after the low item, but agent 1 would not envy back.
  stream = additive(Direction.GOODS, [(5, 5), (1, 1)], profile=BI_1_5)
  allocator = create_allocator('bivalued_two_goods', Setting.for_stream(stream))
  seen = [str(step.decision) for step in unfold(StreamAdversary(stream), allocator)]
  assert seen == ['Assign(1)', 'Assign(2)']
  assert allocator.mode is Mode.BASE
  assert allocator.transitions == ()

def test_bivalued_two_chores_first_items():
  stream = additive(Direction.CHORES, [(1, 5)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_chores') == ['Assign(1)']
  stream = additive(Direction.CHORES, [(5, 1)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_chores') == ['Assign(2)']
  stream = additive(Direction.CHORES, [(1, 1)], profile=BI_1_5)
  assert decisions(stream, 'bivalued_two_chores') == ['Assign(1)']

def test_adapted_picking():
  rows = [(1, 1), (1, 1), (0, 1), (1, 5), (1, 1)]
  stream = additive(Direction.GOODS, rows, profile=('binary', 'bivalued(1,5)'))
  assert decisions(stream, 'adapted_picking') == [
    'Assign(1)', 'Assign(2)', 'Assign(2)', 'Assign(2)', 'Assign(1)']

  stream = additive(Direction.GOODS, [(0, 0, 5)], profile=('binary', 'binary', 'bivalued(1,5)'))
  assert decisions(stream, 'adapted_picking') == ['Assign(3)']

  stream = additive(
    Direction.GOODS, [(1, 0, 5)], profile=('binary', 'binary', 'bivalued(1,5)'))
  with pytest.raises(ClassMismatch, match='differing binary values'):
    decisions(stream, 'adapted_picking')

def test_adapted_chores_picking():
  rows = [(1, 1, 1), (0, 1, 1), (1, 1, 1), (1, 1, 3), (1, 1, 3)]
  profile = ('binary', 'binary', 'bivalued(1,3)')
  stream = additive(Direction.CHORES, rows, profile=profile)
  assert decisions(stream, 'adapted_chores_picking') == [
    'Assign(3)', 'Assign(1)', 'Assign(1)', 'Assign(2)', 'Assign(1)']

  stream = additive(Direction.CHORES, [(1, 0, 1)], profile=profile)
  assert decisions(stream, 'adapted_chores_picking') == ['Assign(2)']

def test_deadline_matching_goods():
  # Agent 2 envies agent 1 after e2 and values the held e3 highly.
  rows = [(5, 5), (1, 1), (5, 5), (1, 1)]
  stream = additive(Direction.GOODS, rows, deadline=1, profile=BI_1_5)
  report = run(stream, 'deadline_matching', timing=False)
  assert [str(r.decision) for r in report.records] == [
    'Hold', 'Assign(2, release=1)', 'Hold', 'Assign(1, release=2)']
  assert report.allocation.bundles == (frozenset({ 1, 4 }), frozenset({ 2, 3 }))
  assert [r.metrics is None for r in report.records] == [True, False, True, False]
  assert report.summary[Metric.EF1] == 1

  # Without envy, equal values for agent 1 defer to agent 2's preference.
  stream = additive(Direction.GOODS, [(1, 5), (1, 1)], deadline=1, profile=BI_1_5)
  report = run(stream, 'deadline_matching', timing=False)
  assert str(report.records[-1].decision) == 'Assign(1, release=2)'
  assert report.allocation.bundles == (frozenset({ 2 }), frozenset({ 1 }))

def test_deadline_matching_flush():
  rows = [(5, 5), (1, 1), (1, 5)]
  stream = additive(Direction.GOODS, rows, deadline=1, profile=BI_1_5)
  report = run(stream, 'deadline_matching', timing=False)
  last = report.records[-1]
  assert last.flush
  assert str(last.decision) == 'Assign(2)'
  assert report.allocation.held is None
  assert report.allocation.bundles == (frozenset({ 1 }), frozenset({ 2, 3 }))
  assert report.rounds == 3
  assert report.final.ef1 == 1

  setting = Setting.for_stream(stream)
  allocator = create_allocator('deadline_matching', setting)
  assert allocator.flush(Allocation.for_stream(stream), oracle_for_stream(stream)) is None

def test_replay():
  stream = additive(Direction.GOODS, [(1, 1), (1, 1)])
  recorded = (Decision.assign(2), Decision.discard())
  assert decisions(stream, 'replay', decisions=recorded) == ['Assign(2)', 'Discard']
  with pytest.raises(ConfigError, match='run out'):
    decisions(stream, 'replay', decisions=recorded[:1])

# --------------------------------------------------------------------------------------

def test_create_allocator_errors():
  goods = Setting(Direction.GOODS, 3)
  chores = Setting(Direction.CHORES, 2)

  assert set(ALLOCATORS) >= { 'greedy_nw', 'round_robin', 'deadline_matching' }
  with pytest.raises(ConfigError, match='unknown algorithm'):
    create_allocator('nope', goods)
  with pytest.raises(ConfigError, match='bad parameters'):
    create_allocator('greedy_nw', goods, strict=False, order=(1, 2, 3))
  with pytest.raises(ConfigError, match='not a permutation'):
    create_allocator('marginal_greedy', goods, strict=False, order=(1, 1, 2))
  with pytest.raises(ClassMismatch, match='allocates goods'):
    create_allocator('greedy_nw', chores)
  with pytest.raises(ClassMismatch, match='declared valuation classes'):
    create_allocator('greedy_nw', goods)
  with pytest.raises(WrongAgentCount):
    create_allocator('bivalued_two_goods', goods, strict=False)
  with pytest.raises(DeadlineUnsupported):
    create_allocator('deadline_matching', chores, strict=False)

def test_strict_item_checks():
  stream = additive(Direction.GOODS, [(2, 1)], profile=('binary', 'binary'))
  allocator = create_allocator('greedy_nw', Setting.for_stream(stream))
  with pytest.raises(ClassMismatch, match='is not binary'):
    allocator.step(first_view(stream))

  lenient = create_allocator('greedy_nw', Setting.for_stream(stream), strict=False)
  assert lenient.step(first_view(stream)) == Decision.assign(1)

def test_setting_for_stream():
  stream = additive(Direction.GOODS, [(1, 5), (0, 1)])
  setting = Setting.for_stream(stream)
  assert [str(c) for c in setting.profile] == ['binary', 'bivalued(1/1,5/1)']
  assert setting.monotone

  stream = additive(Direction.GOODS, [(1, 5), (2, 1), (0, 3)], monotone=True)
  with pytest.raises(NotMonotone):
    Setting.for_stream(stream)

# ======================================================================================
# Guarantees on random streams within each algorithm's class

def guarantee(family, direction, algorithm, *, seeds, n=2, t=8, **options):
  rng = random.Random(algorithm)
  for seed in range(seed_count(seeds)):
    spec = GeneratorSpec(
      family, direction, n=rng.choice(n) if isinstance(n, tuple) else n,
      t=rng.randint(1, t), **options)
    stream = generate(spec, seed)
    report = run(stream, algorithm, timing=False)
    assert report.violations == (), (seed, report.violations)
    yield seed, report

def test_greedy_nw_is_non_wasteful():
  for family in (Family.BINARY, Family.PARTITION_MATROID):
    for _ in guarantee(family, Direction.GOODS, 'greedy_nw', seeds=30, n=(2, 3)):
      pass

def test_marginal_greedy_on_matroids():
  half = Fraction(1, 2)
  for seed, report in guarantee(
    Family.PARTITION_MATROID, Direction.GOODS, 'marginal_greedy', seeds=40, n=(2, 3),
  ):
    assert report.summary[Metric.EF1] >= half, seed
    assert report.summary[Metric.MMS] >= half, seed
    assert report.summary[Metric.USW] >= half, seed

def test_marginal_greedy_on_binary_is_exact():
  for seed, report in guarantee(
    Family.BINARY, Direction.GOODS, 'marginal_greedy', seeds=40, n=(2, 3),
  ):
    assert report.summary == { Metric.EF1: 1, Metric.MMS: 1, Metric.USW: 1 }, seed

def test_bivalued_two_goods_guarantee():
  for levels in ((1, 5), (1, 10), (3, 7)):
    for seed, report in guarantee(
      Family.BIVALUED, Direction.GOODS, 'bivalued_two_goods', seeds=25, t=10,
      levels=tuple(Fraction(l) for l in levels),
    ):
      assert report.summary[Metric.EF1] >= Fraction(1, 2), (levels, seed)
      assert report.summary[Metric.MMS] >= Fraction(1, 3), (levels, seed)

def test_bivalued_two_chores_guarantee():
  for levels in ((1, 5), (1, 10), (3, 7)):
    for seed, report in guarantee(
      Family.BIVALUED, Direction.CHORES, 'bivalued_two_chores', seeds=25, t=10,
      levels=tuple(Fraction(l) for l in levels),
    ):
      assert report.summary[Metric.EF1] <= 2, (levels, seed)
      assert report.summary[Metric.MMS] <= Fraction(5, 3), (levels, seed)

@pytest.mark.parametrize('direction', list(Direction))
def test_controllers_are_ef1_in_base_mode(direction):
  name = 'bivalued_two_goods' if direction is Direction.GOODS else 'bivalued_two_chores'
  for seed in range(seed_count(40)):
    spec = GeneratorSpec(Family.BIVALUED, direction, t=12, levels=(Fraction(1), Fraction(4)))
    stream = generate(spec, seed)
    adversary = StreamAdversary(stream)
    allocator = create_allocator(name, adversary.setting())

    base = []
    for step in unfold(adversary, allocator):
      if allocator.mode is Mode.BASE:
        base.append(step)
    changed = { transition.round for transition in allocator.transitions }
    for step in base:
      if step.item.id in changed:
        continue
      assert audit_round(step.allocation, step.oracle).ef1 == 1, seed
      assert not (
        envies(step.oracle, step.allocation, 1, 2)
        and envies(step.oracle, step.allocation, 2, 1)
      ), seed

def test_adapted_picking_guarantee():
  for seed, report in guarantee(
    Family.BINARY_BIVALUED, Direction.GOODS, 'adapted_picking', seeds=30, n=(2, 3, 4),
    levels=(Fraction(1), Fraction(3)),
  ):
    assert report.summary[Metric.EF1] == 1, seed
    assert report.summary[Metric.MMS] == 1, seed

def test_adapted_chores_picking_guarantee():
  for seed, report in guarantee(
    Family.BINARY_BIVALUED, Direction.CHORES, 'adapted_chores_picking', seeds=30,
    n=(2, 3, 4), levels=(Fraction(1), Fraction(3)),
  ):
    assert report.summary[Metric.EF1] == 1, seed
    assert report.summary[Metric.MMS] == 1, seed

def test_compelled_greedy_guarantee():
  for seed, report in guarantee(
    Family.BINARY, Direction.CHORES, 'compelled_greedy', seeds=40, n=(2, 3),
  ):
    assert report.summary == { Metric.EF1: 1, Metric.MMS: 1, Metric.USC: 1 }, seed

@pytest.mark.parametrize('direction', list(Direction))
def test_deadline_matching_guarantee(direction):
  for seed, report in guarantee(
    Family.BIVALUED, direction, 'deadline_matching', seeds=40, t=10,
    levels=(Fraction(1), Fraction(5)), deadline=1,
  ):
    assert report.allocation.held is None
    assert report.summary[Metric.EF1] == 1, seed

def test_monotone_guarantees():
  for order in Order:
    for seed, report in guarantee(
      Family.ADDITIVE, Direction.CHORES, 'round_robin', seeds=20, n=(2, 3), monotone=order,
    ):
      assert report.summary[Metric.EF1] == 1, (order, seed)

  for seed in range(seed_count(20)):
    spec = GeneratorSpec(Family.ADDITIVE, n=3, t=7, monotone=Order.MIXED)
    report = run(generate(spec, seed), 'marginal_greedy', params={ 'monotone': True })
    assert report.summary[Metric.EF1] == 1, seed
