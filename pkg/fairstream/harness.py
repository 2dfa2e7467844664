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
Running allocators on streams and reporting on the results. :py:func:`run`
feeds a stream, or :py:func:`run_adversary` an adaptive adversary, through an
allocator, audits every round, and folds the per-round audits into a
:py:class:`RunReport`. For goods, the fold of a ratio is its minimum over all
rounds, for chores its maximum, so that a run achieves α-EF1 exactly when the
folded EF1 ratio meets α. Streams with deadline are audited only when no item
is held and once more after the final flush.

Reports render as JSON and CSV. :py:func:`run_batch` runs several jobs on a
thread pool and reports in job order.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import io
import time

from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from fairstream.adversaries import Adversary, StreamAdversary, unfold
from fairstream.algorithms import Allocator, create_allocator
from fairstream.audit import (
  audit_round,
  Bound,
  EnumerationStats,
  Metric,
  RoundMetrics,
)
from fairstream.core import Allocation, Decision, Direction, Ratio, Stream
from fairstream.serde import format_rational

__all__ = [
  'RoundRecord',
  'BoundResult',
  'RunReport',
  'Job',
  'run',
  'run_adversary',
  'run_job',
  'run_batch',
  'fold',
  'write_csv',
]

@dataclasses.dataclass(frozen=True)
class RoundRecord:
  """One round of a run."""

  round: int
  decision: Decision
  metrics: Optional[RoundMetrics]
  """The audit after the decision or ``None`` while an item is held."""
  mode: Optional[str] = None
  """The controller mode after the decision, for controllers with modes."""
  flush: bool = False
  """Whether this record is the final flush of a held item."""

  def to_dict(self) -> dict[str, Any]:
    return {
      'round': self.round,
      'flush': self.flush or None,
      'decision': self.decision.to_dict(),
      'mode': self.mode,
      'metrics': None if self.metrics is None else self.metrics.to_dict(),
    }


@dataclasses.dataclass(frozen=True)
class BoundResult:
  bound: Bound
  value: Optional[Ratio]
  """The folded value or ``None`` if every round skipped the metric."""
  holds: bool

  def to_dict(self) -> dict[str, Any]:
    return { 'bound': str(self.bound), 'value': self.value, 'holds': self.holds }


def _worse(x: Ratio, y: Ratio, direction: Direction) -> Ratio:
  return min(x, y) if direction is Direction.GOODS else max(x, y)

def fold(
  values: Iterable[Optional[Ratio]], direction: Direction
) -> Optional[Ratio]:
  """
  Fold per-round ratios into the run's ratio, i.e., the minimum for goods and
  the maximum for chores. Skipped rounds do not count.
  """
  result: Optional[Ratio] = None
  for value in values:
    if value is not None:
      result = value if result is None else _worse(result, value, direction)
  return result


@dataclasses.dataclass(frozen=True)
class RunReport:
  """The outcome of one run."""

  algorithm: str
  instance: str
  direction: Direction
  n: int
  records: tuple[RoundRecord, ...]
  allocation: Allocation
  summary: Mapping[Metric, Optional[Ratio]]
  """The folded EF1, MMS, and USW or USC ratios."""
  bounds: tuple[BoundResult, ...] = ()
  violations: tuple[str, ...] = ()
  """The rounds breaking non-wastefulness or completeness."""
  skipped: int = 0
  """The number of metrics skipped for exceeding the enumeration budget."""
  stats: EnumerationStats = dataclasses.field(default_factory=EnumerationStats)
  elapsed: Optional[float] = None
  """The wall-clock seconds, unless timing was disabled."""

  @property
  def rounds(self) -> int:
    """The number of items processed."""
    return self.allocation.round

  @property
  def final(self) -> Optional[RoundMetrics]:
    """The last audit."""
    for record in reversed(self.records):
      if record.metrics is not None:
        return record.metrics
    return None

  @property
  def ok(self) -> bool:
    """Whether all bounds hold."""
    return all(result.holds for result in self.bounds)

  @property
  def exit_code(self) -> int:
    return 0 if self.ok else 1

  def to_dict(self) -> dict[str, Any]:
    final = self.final
    return {
      'algorithm': self.algorithm,
      'instance': self.instance,
      'direction': self.direction,
      'n': self.n,
      'rounds': self.rounds,
      'summary': { metric.value: value for metric, value in self.summary.items() },
      'final': None if final is None else final.to_dict(),
      'allocation': self.allocation.to_dict(),
      'bounds': [result.to_dict() for result in self.bounds],
      'violations': list(self.violations),
      'skipped': self.skipped,
      'enumeration': {
        'partitions': self.stats.partitions,
        'assignments': self.stats.assignments,
      },
      'elapsed': self.elapsed,
      'records': [record.to_dict() for record in self.records],
    }

# --------------------------------------------------------------------------------------

def _welfare_metric(direction: Direction) -> Metric:
  return Metric.USW if direction is Direction.GOODS else Metric.USC

def run_adversary(
  adversary: Adversary,
  allocator: Allocator,
  *,
  algorithm: Optional[str] = None,
  bounds: Sequence[Bound] = (),
  budget: Optional[int] = None,
  audit: bool = True,
  timing: bool = True,
) -> RunReport:
  """
  Run the allocator against the adversary and audit the result.

  :raises ClassMismatch: indicates a bound on the wrong welfare metric.
  """
  direction = adversary.direction
  for bound in bounds:
    bound.metric.check(direction)

  started = time.perf_counter()
  stats = EnumerationStats()
  records: list[RoundRecord] = []
  violations: list[str] = []
  skipped = 0
  allocation = adversary.empty()

  for step in unfold(adversary, allocator):
    allocation = step.allocation
    metrics = None
    if audit and allocation.held is None:
      metrics = audit_round(allocation, step.oracle, budget, stats)
      skipped += (metrics.mms is None) + (metrics.welfare_ratio is None)
      if metrics.nw_ok is False:
        violations.append(f'round {allocation.round} is wasteful')
      if metrics.complete_ok is False:
        violations.append(f'round {allocation.round} is incomplete')
    mode = getattr(allocator, 'mode', None)
    records.append(RoundRecord(
      allocation.round,
      step.decision,
      metrics,
      None if mode is None else mode.value,
      step.item is None,
    ))

  audits = [r.metrics for r in records if r.metrics is not None]
  welfare = _welfare_metric(direction)
  summary: dict[Metric, Optional[Ratio]] = {
    metric: fold((metric.of(m) for m in audits), direction)
    for metric in (Metric.EF1, Metric.MMS, welfare)
  }
  results = tuple(
    BoundResult(bound, summary[bound.metric], bound.holds(summary[bound.metric]))
    for bound in bounds
  )
  return RunReport(
    algorithm=algorithm or allocator.name,
    instance=adversary.name,
    direction=direction,
    n=adversary.n,
    records=tuple(records),
    allocation=allocation,
    summary=summary,
    bounds=results,
    violations=tuple(violations),
    skipped=skipped,
    stats=stats,
    elapsed=time.perf_counter() - started if timing else None,
  )

def run(
  stream: Stream,
  algorithm: Union[str, Allocator],
  *,
  instance: str = 'stream',
  strict: bool = True,
  params: Optional[Mapping[str, Any]] = None,
  bounds: Sequence[Bound] = (),
  budget: Optional[int] = None,
  audit: bool = True,
  timing: bool = True,
) -> RunReport:
  """
  Run the named or given allocator on the stream.

  :raises ConfigError: indicates an unknown algorithm or bad parameters.
  :raises ClassMismatch: indicates a stream outside the algorithm's classes.
  :raises IllegalDecision: indicates an allocator breaking the model's rules.
  """
  adversary = StreamAdversary(stream, instance)
  if isinstance(algorithm, str):
    allocator = create_allocator(algorithm, adversary.setting(), strict, **(params or {}))
  else:
    allocator = algorithm
  return run_adversary(
    adversary, allocator, bounds=bounds, budget=budget, audit=audit, timing=timing)

# --------------------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Job:
  """One run of a batch."""
  instance: str
  stream: Stream
  algorithm: str
  params: Mapping[str, Any] = dataclasses.field(default_factory=dict)
  strict: bool = True


def run_job(
  job: Job,
  bounds: Sequence[Bound] = (),
  budget: Optional[int] = None,
  timing: bool = True,
) -> RunReport:
  return run(
    job.stream, job.algorithm,
    instance=job.instance, strict=job.strict, params=job.params,
    bounds=bounds, budget=budget, timing=timing,
  )

def run_batch(
  jobs: Sequence[Job],
  *,
  bounds: Sequence[Bound] = (),
  budget: Optional[int] = None,
  timing: bool = True,
  workers: Optional[int] = None,
) -> list[RunReport]:
  """
  Run independent jobs on a thread pool. Reports come back in job order, and
  the first failing job's exception propagates.
  """
  with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
    futures = [executor.submit(run_job, job, bounds, budget, timing) for job in jobs]
    return [future.result() for future in futures]

# --------------------------------------------------------------------------------------

CSV_COLUMNS = (
  'instance', 'round', 'flush', 'decision', 'agent', 'release', 'mode',
  'ef1', 'ef1_raw', 'mms', 'mms_raw', 'welfare', 'optimum', 'welfare_ratio',
  'nw_ok', 'complete_ok',
)

def _cell(value: Any) -> str:
  if value is None:
    return ''
  if isinstance(value, bool):
    return 'true' if value else 'false'
  if isinstance(value, (int, str)):
    return str(value)
  return format_rational(value)

def write_csv(reports: Iterable[RunReport]) -> str:
  """Render the per-round records of the reports as CSV text."""
  buffer = io.StringIO()
  writer = csv.writer(buffer, lineterminator='\n')
  writer.writerow(CSV_COLUMNS)
  for report in reports:
    for record in report.records:
      m = record.metrics
      writer.writerow([_cell(v) for v in (
        report.instance,
        record.round,
        record.flush,
        record.decision.kind.value,
        record.decision.agent,
        record.decision.release,
        record.mode,
        None if m is None else m.ef1,
        None if m is None else m.ef1_raw,
        None if m is None else m.mms,
        None if m is None else m.mms_raw,
        None if m is None else m.welfare,
        None if m is None else m.optimum,
        None if m is None else m.welfare_ratio,
        None if m is None else m.nw_ok,
        None if m is None else m.complete_ok,
      )])
  return buffer.getvalue()
