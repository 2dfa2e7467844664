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

from fractions import Fraction

from fairstream.audit import Bound, Metric
from fairstream.core import Direction, Stream
from fairstream.error import ClassMismatch, ConfigError
from fairstream.harness import CSV_COLUMNS, fold, Job, run, run_batch, write_csv

from .instances import additive, example_stream, EXAMPLE_DECISIONS

def replay_example(**options):
  return run(
    example_stream(), 'replay', params={'decisions': EXAMPLE_DECISIONS}, **options)


def test_fold():
  half, third = Fraction(1, 2), Fraction(1, 3)
  assert fold([None, half, third], Direction.GOODS) == third
  assert fold([None, half, third], Direction.CHORES) == half
  assert fold([None, None], Direction.GOODS) is None
  assert fold([], Direction.CHORES) is None


def test_example_summary():
  report = replay_example(timing=False)
  assert report.rounds == 5
  assert len(report.records) == 5
  assert [r.round for r in report.records] == [1, 2, 3, 4, 5]
  assert all(r.mode is None and not r.flush for r in report.records)
  assert report.summary == {
    Metric.EF1: Fraction(1, 2),
    Metric.MMS: Fraction(1, 2),
    Metric.USW: Fraction(1, 2),
  }
  assert report.violations == ()
  assert report.skipped == 0
  assert report.elapsed is None
  assert report.final is not None
  assert report.final.round == 5
  assert report.final.welfare == 32
  assert report.final.optimum == 44
  assert report.allocation.bundle(1) == frozenset({1, 4, 5})
  assert report.ok
  assert report.exit_code == 0


def test_bounds():
  report = replay_example(bounds=[Bound.parse('EF1>=1/2'), Bound.parse('MMS>=2/3')])
  assert [result.holds for result in report.bounds] == [True, False]
  assert [result.value for result in report.bounds] == [Fraction(1, 2)] * 2
  assert not report.ok
  assert report.exit_code == 1
  assert report.elapsed is not None

  with pytest.raises(ClassMismatch):
    replay_example(bounds=[Bound.parse('USC<=2')])


def test_budget_skips_metrics():
  report = replay_example(budget=10)
  assert report.skipped == 2
  assert [r.metrics.mms is None for r in report.records] == [
    False, False, False, True, True]
  assert all(r.metrics.welfare_ratio is not None for r in report.records)
  assert report.summary[Metric.MMS] == 1
  assert report.stats.partitions > 0


def test_no_audit():
  report = replay_example(audit=False)
  assert all(r.metrics is None for r in report.records)
  assert report.final is None
  assert all(value is None for value in report.summary.values())


def test_wasteful_rounds():
  stream = additive(Direction.GOODS, [(0, 1), (1, 0)])
  report = run(stream, 'greedy_nw', timing=False)
  assert report.violations == ()

  report = run(
    stream, 'replay', strict=False, timing=False,
    params={'decisions': EXAMPLE_DECISIONS[:2]},
  )
  assert report.violations == ('round 1 is wasteful', 'round 2 is wasteful')


def test_empty_stream():
  stream = Stream(Direction.GOODS, 2, ())
  report = run(stream, 'replay', params={'decisions': ()}, bounds=[
    Bound.parse('EF1>=1')])
  assert report.rounds == 0
  assert report.records == ()
  assert report.final is None
  assert all(value is None for value in report.summary.values())
  assert report.ok


def test_unknown_algorithm():
  with pytest.raises(ConfigError):
    run(example_stream(), 'no_such_algorithm')


def test_to_dict():
  data = replay_example(timing=False).to_dict()
  assert data['algorithm'] == 'replay'
  assert data['instance'] == 'stream'
  assert data['rounds'] == 5
  assert data['summary'] == {
    'EF1': Fraction(1, 2), 'MMS': Fraction(1, 2), 'USW': Fraction(1, 2)}
  assert data['bounds'] == []
  assert data['elapsed'] is None
  assert len(data['records']) == 5
  assert data['records'][0]['flush'] is None


def test_write_csv():
  text = write_csv([replay_example(instance='example')])
  lines = text.splitlines()
  assert lines[0] == ','.join(CSV_COLUMNS)
  assert len(lines) == 6
  assert lines[1] == (
    'example,1,false,assign,1,,,1/1,inf,1/1,inf,6/1,12/1,1/2,true,')
  assert lines[5].startswith('example,5,false,assign,1,,,1/2,1/2,1/2,1/2,32/1,44/1,8/11,')


BINARY_ROWS = [(1, 0, 1), (1, 1, 0), (0, 1, 1), (1, 1, 1)]

def test_run_batch_keeps_job_order():
  goods = additive(Direction.GOODS, BINARY_ROWS)
  chores = additive(Direction.CHORES, [(1, 2), (2, 2), (3, 4)], monotone=True)
  jobs = [
    Job('instance-0', goods, 'greedy_nw'),
    Job('instance-1', chores, 'round_robin'),
    Job('instance-2', goods, 'marginal_greedy'),
  ]
  reports = run_batch(jobs, timing=False, workers=3)
  assert [r.instance for r in reports] == ['instance-0', 'instance-1', 'instance-2']
  assert [r.algorithm for r in reports] == [
    'greedy_nw', 'round_robin', 'marginal_greedy']
  assert [r.rounds for r in reports] == [4, 3, 4]
  assert reports[1].allocation.bundle(1) == frozenset({1, 3})
  assert Metric.USC in reports[1].summary


def test_run_batch_propagates_failure():
  jobs = [
    Job('good', additive(Direction.GOODS, BINARY_ROWS), 'greedy_nw'),
    Job('bad', example_stream(), 'no_such_algorithm'),
  ]
  with pytest.raises(ConfigError):
    run_batch(jobs)
