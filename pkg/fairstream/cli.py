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
The command line interface to *fairstream*. The tool has six subcommands:

* ``run`` runs an algorithm on instance files and reports per-round audits,
* ``gen`` generates seeded random instance files,
* ``adversary`` plays a builtin adversary against an algorithm or an external
  allocator and compares the outcome with the certified game value,
* ``search`` solves an adversary's game by exhaustive search,
* ``audit`` re-audits recorded decisions on an instance,
* ``client`` serves an algorithm over the external allocator protocol.

Reports go to standard output or files, log messages to standard error. The
exit code is 0 if all bounds hold, 1 if some bound fails, and 2 on errors.
"""

from __future__ import annotations

import sys

from argparse import ArgumentParser, BooleanOptionalAction, Namespace
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

from fairstream import __version__
from fairstream.adversaries import (
  Adversary,
  BUILTIN_ADVERSARIES,
  builtin_adversary,
  game_tree,
  load_tree,
  solve_game,
  StreamAdversary,
)
from fairstream.algorithms import ALLOCATORS, create_allocator
from fairstream.audit import Bound, Metric
from fairstream.config import BUDGET_VARIABLE, DEFAULT_EPSILON, enumeration_budget
from fairstream.core import Direction
from fairstream.error import ConfigError, FairstreamError, ValidationError
from fairstream.generators import GeneratorSpec, Order, generate
from fairstream.harness import Job, run, run_adversary, run_batch, RunReport, write_csv
from fairstream.ingest import load_decisions, load_stream, write_stream
from fairstream.logger import Logger, pluralize
from fairstream.protocol import (
  allocator_factory,
  DEFAULT_TIMEOUT,
  ExternalAllocator,
  ProcessChannel,
  serve,
)
from fairstream.serde import dumps, format_rational, parse_rational

__all__ = ['create_parser', 'main']

# --------------------------------------------------------------------------------------
# Argument Parsing

def parse_param(text: str) -> tuple[str, Any]:
  """
  Parse an algorithm parameter ``key=value``. Values ``true`` and ``false``
  become booleans, integers become integers, and comma-separated integers
  become tuples, e.g., ``order=2,1,3``.

  :raises ConfigError: indicates a malformed parameter.
  """
  key, sep, value = text.partition('=')
  key, value = key.strip(), value.strip()
  if not sep or not key.isidentifier():
    raise ConfigError(f'parameter "{text}" is not of the form key=value')
  if value in ('true', 'false'):
    return key, value == 'true'
  try:
    if ',' in value:
      return key, tuple(int(part) for part in value.split(','))
    return key, int(value)
  except ValueError:
    return key, value

def _add_tool_options(parser: ArgumentParser, version: Optional[str] = None) -> None:
  about = parser.add_argument_group('tool options')
  about.add_argument(
    '-h', '--help',
    action='help',
    help='show detailed help message and exit'
  )
  if version is not None:
    about.add_argument(
      '-V', '--version',
      action='version', version=version
    )

def _add_output_options(parser: ArgumentParser, *, report: bool = True) -> Any:
  output = parser.add_argument_group('output options')
  output.add_argument(
    '--color',
    action=BooleanOptionalAction, default=True,
    help='enable or disable the use of color in log messages'
  )
  output.add_argument(
    '-v', '--verbose',
    action='store_true',
    help='log per-round details'
  )
  if report:
    output.add_argument(
      '-f', '--format',
      choices=['json', 'pretty', 'none'], default='pretty',
      help='write the report to standard output as plain or pretty-printed JSON, '
      'or not at all'
    )
    output.add_argument(
      '--report',
      metavar='FILE', type=Path,
      help='also write the JSON report to this file'
    )
  return output

def _add_audit_options(parser: ArgumentParser) -> None:
  audit = parser.add_argument_group('audit options')
  audit.add_argument(
    '-b', '--bound',
    action='append', default=[], metavar='BOUND',
    help='check a bound such as "EF1>=1/2" or "MMS<=5/3" on the folded ratios; '
    'may be repeated'
  )
  audit.add_argument(
    '--budget',
    type=int, metavar='N',
    help=f'skip MMS and welfare audits needing more than N partitions or '
    f'assignments (default: ${BUDGET_VARIABLE} or {enumeration_budget():,})'
  )
  audit.add_argument(
    '--timing',
    action=BooleanOptionalAction, default=True,
    help='include wall-clock time in reports; disable for byte-stable output'
  )

def _add_algorithm_options(parser: ArgumentParser, *, required: bool = False) -> None:
  algorithm = parser.add_argument_group('algorithm options')
  algorithm.add_argument(
    '-a', '--algorithm',
    choices=sorted(name for name in ALLOCATORS if name != 'replay'),
    required=required,
    help='the allocation algorithm'
  )
  algorithm.add_argument(
    '-p', '--param',
    action='append', default=[], metavar='KEY=VALUE',
    help='pass a parameter to the algorithm, e.g., "order=2,1,3"; may be repeated'
  )
  algorithm.add_argument(
    '--strict',
    action=BooleanOptionalAction, default=True,
    help='check items against the algorithm\'s valuation classes'
  )

def _subparser(subparsers: Any, name: str, help: str, description: str) -> ArgumentParser:
  parser: ArgumentParser = subparsers.add_parser(
    name,
    help=help,
    description=description,
    # The epilog consists of U+3164, the Hangul filler, to force a blank line.
    # It's necessary because Python ignores various space characters.
    epilog='ㅤ',
    add_help=False,
  )
  _add_tool_options(parser)
  return parser

def create_parser() -> ArgumentParser:
  """Create the argument parser for the fairstream command line tool."""
  prog = 'fairstream'
  version = f'{prog} {__version__}'
  description = 'Run, audit, and attack online fair allocation algorithms.'

  parser = ArgumentParser(
    prog=prog,
    description=description,
    epilog='ㅤ',
    add_help=False,
  )
  _add_tool_options(parser, version)
  subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

  # run
  run_parser = _subparser(
    subparsers, 'run', 'run an algorithm on instance files',
    'Run an algorithm on one or more instance files and audit every round.',
  )
  _add_algorithm_options(run_parser)
  run_parser.add_argument(
    '--decisions',
    metavar='FILE', type=Path,
    help='replay recorded decisions instead of running an algorithm'
  )
  run_parser.add_argument(
    '--workers',
    type=int, metavar='N',
    help='the number of threads for running several instances'
  )
  _add_audit_options(run_parser)
  output = _add_output_options(run_parser)
  output.add_argument(
    '--csv',
    metavar='FILE', type=Path,
    help='write the per-round records as CSV to this file'
  )
  run_parser.add_argument('instances', metavar='INSTANCE', nargs='+', type=Path,
                          help='path of JSONL instance file')

  # gen
  gen_parser = _subparser(
    subparsers, 'gen', 'generate random instance files',
    'Generate seeded random instances within a valuation class.',
  )
  family = gen_parser.add_argument_group('generator options')
  family.add_argument('-n', '--agents', type=int, default=2, metavar='N',
                      help='the number of agents')
  family.add_argument('-t', '--items', type=int, default=6, metavar='T',
                      help='the number of items')
  family.add_argument('-s', '--seed', type=int, default=0, help='the first seed')
  family.add_argument('--count', type=int, default=1,
                      help='the number of instances, using consecutive seeds')
  family.add_argument('--direction', choices=[d.value for d in Direction],
                      default=Direction.GOODS.value, help='goods or chores')
  family.add_argument('--categories', type=int, default=4,
                      help='the number of categories for matroid families')
  family.add_argument('--loops', action=BooleanOptionalAction, default=True,
                      help='allow items without category in matroid families')
  family.add_argument('--maximum', type=int, default=10,
                      help='the largest value for general additive instances')
  family.add_argument('--monotone', choices=[o.value for o in Order],
                      help='sort each agent\'s values or costs')
  family.add_argument('--deadline', type=int, choices=[0, 1], default=0,
                      help='the deadline declared by the instance')
  gen_output = _add_output_options(gen_parser, report=False)
  gen_output.add_argument(
    '-o', '--output',
    metavar='PATH', type=Path,
    help='write to this file or, with --count, into this directory'
  )
  gen_parser.add_argument('family', metavar='FAMILY',
                          help='binary, bivalued(a,b), trivalued(a,b,z), additive, '
                          'partition-matroid, supermod-complement, or binary-bivalued(a,b)')

  # adversary
  adversary_parser = _subparser(
    subparsers, 'adversary', 'play an adversary against an algorithm',
    'Play a builtin adversary against an algorithm or an external allocator.',
  )
  _add_adversary_options(adversary_parser)
  _add_algorithm_options(adversary_parser)
  adversary_parser.set_defaults(strict=False)
  adversary_parser.add_argument(
    '--command',
    dest='external', metavar='CMD', nargs='+',
    help='the command line of an external allocator speaking the stdio protocol'
  )
  adversary_parser.add_argument(
    '--timeout',
    type=float, default=DEFAULT_TIMEOUT, metavar='SECONDS',
    help='the time to wait for each reply of an external allocator'
  )
  _add_audit_options(adversary_parser)
  _add_output_options(adversary_parser)
  adversary_parser.add_argument('name', metavar='NAME', choices=sorted(BUILTIN_ADVERSARIES),
                                help='the builtin adversary')

  # search
  search_parser = _subparser(
    subparsers, 'search', 'solve an adversary\'s game',
    'Find the best ratio any deterministic algorithm guarantees against an adversary.',
  )
  _add_adversary_options(search_parser)
  game = search_parser.add_argument_group('game options')
  game.add_argument('-m', '--metric', action='append', default=[],
                    choices=[m.value for m in Metric],
                    help='the metric to solve for; may be repeated (default: EF1 and MMS)')
  game.add_argument('-g', '--guard', metavar='BOUND',
                    help='only admit decision paths meeting this bound, e.g., "EF1>=1"')
  game.add_argument('--budget', type=int, metavar='N',
                    help='the largest number of game tree nodes and partitions')
  game.add_argument('--tree', action='store_true',
                    help='interpret NAME as the path of a case tree file')
  game.add_argument('--instance', action='store_true',
                    help='interpret NAME as the path of an instance file')
  search_output = _add_output_options(search_parser)
  search_output.add_argument('--export', metavar='FILE', type=Path,
                             help='write the full game tree as JSON to this file')
  search_parser.add_argument('name', metavar='NAME',
                             help='the builtin adversary, case tree, or instance')

  # audit
  audit_parser = _subparser(
    subparsers, 'audit', 're-audit recorded decisions',
    'Replay recorded decisions on an instance and audit every round.',
  )
  _add_audit_options(audit_parser)
  audit_output = _add_output_options(audit_parser)
  audit_output.add_argument('--csv', metavar='FILE', type=Path,
                            help='write the per-round records as CSV to this file')
  audit_parser.add_argument('instance', metavar='INSTANCE', type=Path,
                            help='path of JSONL instance file')
  audit_parser.add_argument('decisions', metavar='DECISIONS', type=Path,
                            help='path of JSONL decision file')

  # client
  client_parser = _subparser(
    subparsers, 'client', 'serve an algorithm over the stdio protocol',
    'Serve an algorithm, or a constant policy, as an external allocator on '
    'standard input and output.',
  )
  _add_algorithm_options(client_parser)
  client_parser.set_defaults(strict=False)
  client_parser.add_argument('--constant', type=int, metavar='AGENT',
                             help='assign every item to this agent')
  _add_output_options(client_parser, report=False)

  return parser

def _add_adversary_options(parser: ArgumentParser) -> None:
  adversary = parser.add_argument_group('adversary options')
  adversary.add_argument(
    '-e', '--epsilon',
    default=format_rational(DEFAULT_EPSILON), metavar='RATIONAL',
    help='the ε parameterizing the construction, e.g., "1/10"'
  )
  adversary.add_argument(
    '-n', '--agents',
    type=int, metavar='N',
    help='the number of agents for the constructions with n agents'
  )
  adversary.add_argument(
    '--direction',
    choices=[d.value for d in Direction],
    help='goods or chores, for adversaries with both variants'
  )

# --------------------------------------------------------------------------------------
# Shared Helpers

def _bounds(texts: Sequence[str]) -> list[Bound]:
  return [Bound.parse(text) for text in texts]

def _params(texts: Sequence[str]) -> dict[str, Any]:
  return dict(parse_param(text) for text in texts)

def _epsilon(text: str) -> Any:
  try:
    return parse_rational(text)
  except ValidationError as x:
    raise ConfigError(f'ε "{text}" is malformed: {x}') from None

def _emit(args: Namespace, data: Any, stdout: TextIO) -> None:
  if args.format == 'json':
    stdout.write(dumps(data) + '\n')
  elif args.format == 'pretty':
    stdout.write(dumps(data, indent=2) + '\n')
  stdout.flush()
  if args.report is not None:
    with open(args.report, mode='w', encoding='utf8') as file:
      file.write(dumps(data, indent=2) + '\n')

def _log_report(logger: Logger, report: RunReport) -> None:
  for record in report.records:
    metrics = record.metrics
    line = f'{record.round:>4} {record.decision}'
    if record.mode is not None:
      line += f' [{record.mode}]'
    if metrics is not None:
      line += f' EF1={format_rational(metrics.ef1)}'
      if metrics.mms is not None:
        line += f' MMS={format_rational(metrics.mms)}'
      if metrics.welfare_ratio is not None:
        line += f' W={format_rational(metrics.welfare_ratio)}'
    logger.detail(line)
  for violation in report.violations:
    logger.warn(f'{report.instance}: {violation}')
  if report.skipped:
    logger.warn(
      f'{report.instance}: skipped {report.skipped} '
      f'{pluralize(report.skipped, "metric")} for exceeding the enumeration budget')
  for result in report.bounds:
    if not result.holds:
      value = '-' if result.value is None else format_rational(result.value)
      logger.error(f'{report.instance}: bound {result.bound} fails with {value}')

def _summary_table(logger: Logger, reports: Sequence[RunReport]) -> None:
  if not reports:
    return
  metrics = list(reports[0].summary)
  logger.print_table(
    ['instance', 'algorithm', 'rounds'] + [m.value for m in metrics],
    [
      [r.instance, r.algorithm, r.rounds] + [r.summary.get(m) for m in metrics]
      for r in reports
    ],
  )

# --------------------------------------------------------------------------------------
# Subcommands

def _run(args: Namespace, logger: Logger, stdout: TextIO) -> int:
  bounds = _bounds(args.bound)
  params = _params(args.param)
  if args.decisions is None and args.algorithm is None:
    raise ConfigError('run needs an algorithm or recorded decisions')

  jobs = []
  for path in args.instances:
    logger.info(f'Loading instance "{path}"')
    stream = load_stream(path)
    if args.decisions is not None:
      params = { 'decisions': load_decisions(args.decisions, stream.direction) }
      jobs.append(Job(str(path), stream, 'replay', params, args.strict))
    else:
      jobs.append(Job(str(path), stream, args.algorithm, params, args.strict))

  reports = run_batch(
    jobs, bounds=bounds, budget=args.budget, timing=args.timing, workers=args.workers)
  for report in reports:
    _log_report(logger, report)
  _summary_table(logger, reports)

  _emit(args, reports[0] if len(reports) == 1 else reports, stdout)
  if args.csv is not None:
    with open(args.csv, mode='w', encoding='utf8', newline='') as file:
      file.write(write_csv(reports))

  failed = sum(1 for r in reports if not r.ok)
  message = f'Ran {len(reports):,} {pluralize(len(reports), "instance")}'
  if failed:
    message += f', {failed:,} of which failed some bound'
  logger.done(message + '.')
  return max(r.exit_code for r in reports)

def _audit(args: Namespace, logger: Logger, stdout: TextIO) -> int:
  stream = load_stream(args.instance)
  decisions = load_decisions(args.decisions, stream.direction)
  logger.info(
    f'Re-auditing {len(decisions):,} {pluralize(len(decisions), "decision")} '
    f'on "{args.instance}"')
  allocator = create_allocator(
    'replay', StreamAdversary(stream).setting(), False, decisions=decisions)
  report = run(
    stream, allocator, instance=str(args.instance), bounds=_bounds(args.bound),
    budget=args.budget, timing=args.timing,
  )
  _log_report(logger, report)
  _summary_table(logger, [report])
  _emit(args, report, stdout)
  if args.csv is not None:
    with open(args.csv, mode='w', encoding='utf8', newline='') as file:
      file.write(write_csv([report]))
  logger.done(f'Audited {report.rounds:,} {pluralize(report.rounds, "round")}.')
  return report.exit_code

def _gen(args: Namespace, logger: Logger, stdout: TextIO) -> int:
  spec = GeneratorSpec.parse(
    args.family,
    direction=Direction(args.direction),
    n=args.agents,
    t=args.items,
    categories=args.categories,
    loops=args.loops,
    maximum=args.maximum,
    monotone=None if args.monotone is None else Order(args.monotone),
    deadline=args.deadline,
  )
  if args.count < 1:
    raise ConfigError(f'count {args.count} is not positive')
  if args.count > 1 and args.output is None:
    raise ConfigError('generating several instances needs an output directory')

  seeds = range(args.seed, args.seed + args.count)
  for seed in seeds:
    text = write_stream(generate(spec, seed))
    if args.output is None:
      stdout.write(text)
    elif args.count == 1:
      args.output.write_text(text, encoding='utf8')
    else:
      args.output.mkdir(parents=True, exist_ok=True)
      name = spec.family.value + f'-{seed}.jsonl'
      (args.output / name).write_text(text, encoding='utf8')
    logger.detail(f'Generated {spec.describe()} with seed {seed}')
  stdout.flush()
  logger.done(f'Generated {args.count:,} {pluralize(args.count, "instance")}.')
  return 0

def _adversary_for(args: Namespace, name: str) -> Adversary:
  direction = None if args.direction is None else Direction(args.direction)
  return builtin_adversary(name, _epsilon(args.epsilon), direction, args.agents)

def _adversary(args: Namespace, logger: Logger, stdout: TextIO) -> int:
  adversary = _adversary_for(args, args.name)
  bounds = _bounds(args.bound)
  if (args.algorithm is None) == (args.external is None):
    raise ConfigError('adversary needs either an algorithm or an external command')

  if args.external is not None:
    logger.info(f'Playing {adversary.name} against "{" ".join(args.external)}"')
    channel = ProcessChannel(args.external, args.timeout)
    with ExternalAllocator(
      adversary.setting(), channel, representation=adversary.representation
    ) as allocator:
      report = run_adversary(
        adversary, allocator, algorithm='external', bounds=bounds, budget=args.budget,
        timing=args.timing,
      )
  else:
    logger.info(f'Playing {adversary.name} against {args.algorithm}')
    allocator = create_allocator(
      args.algorithm, adversary.setting(), args.strict, **_params(args.param))
    report = run_adversary(
      adversary, allocator, bounds=bounds, budget=args.budget, timing=args.timing)

  welfare = Metric.USW if adversary.direction is Direction.GOODS else Metric.USC
  games = [
    solve_game(adversary, metric, budget=args.budget)
    for metric in (Metric.EF1, Metric.MMS, welfare)
  ]
  _log_report(logger, report)
  _summary_table(logger, [report])
  logger.print_table(
    ['metric', 'achieved', 'game value'],
    [[g.metric.value, report.summary.get(g.metric), g.value] for g in games],
  )
  _emit(args, { 'report': report, 'games': games }, stdout)
  logger.done(f'Played {adversary.name} for {report.rounds:,} '
              f'{pluralize(report.rounds, "round")}.')
  return report.exit_code

def _search(args: Namespace, logger: Logger, stdout: TextIO) -> int:
  if args.tree and args.instance:
    raise ConfigError('NAME cannot be both a case tree and an instance')
  if args.tree:
    adversary: Adversary = load_tree(Path(args.name))
  elif args.instance:
    adversary = StreamAdversary(load_stream(args.name), args.name)
  else:
    adversary = _adversary_for(args, args.name)

  guard = None if args.guard is None else Bound.parse(args.guard)
  metrics = [Metric(m) for m in args.metric] or [Metric.EF1, Metric.MMS]
  games = []
  for metric in metrics:
    logger.info(f'Solving {adversary.name} for {metric.value}'
                + ('' if guard is None else f' subject to {guard}'))
    game = solve_game(adversary, metric, guard, args.budget)
    logger.detail(f'Explored {game.explored:,} nodes, {game.legal:,} legal paths')
    if game.value is None:
      logger.warn(f'{adversary.name} has no legal decision path for {metric.value}')
    games.append(game)

  logger.print_table(
    ['metric', 'value', 'witness'],
    [[g.metric.value, g.value, ' '.join(str(d) for d in g.witness)] for g in games],
  )
  if args.export is not None:
    with open(args.export, mode='w', encoding='utf8') as file:
      file.write(dumps(game_tree(adversary, args.budget), indent=2) + '\n')
  _emit(args, { 'adversary': adversary.describe(), 'games': games }, stdout)
  logger.done(f'Solved {len(games):,} {pluralize(len(games), "game")}.')
  return 0

def _client(args: Namespace, logger: Logger, stdin: TextIO, stdout: TextIO) -> int:
  if (args.algorithm is None) == (args.constant is None):
    raise ConfigError('client needs either an algorithm or a constant agent')
  if args.constant is not None:
    factory = allocator_factory('constant', args.strict, agent=args.constant)
  else:
    factory = allocator_factory(args.algorithm, args.strict, **_params(args.param))
  count = serve(factory, stdin, stdout)
  logger.done(f'Decided on {count:,} {pluralize(count, "item")}.')
  return 0

# --------------------------------------------------------------------------------------

def main(
  argv: Optional[Sequence[str]] = None,
  *,
  stdin: Optional[TextIO] = None,
  stdout: Optional[TextIO] = None,
  stderr: Optional[TextIO] = None,
) -> int:
  """
  Run the fairstream command line tool and return its exit code: 0 if all
  bounds hold, 1 if some bound fails, and 2 if the tool could not complete.
  """
  parser = create_parser()
  args = parser.parse_args(argv)
  if sys.version_info < (3, 9,):
    parser.exit(status=2, message='fairstream requires Python 3.9 or later')

  stdin = stdin or sys.stdin
  stdout = stdout or sys.stdout
  # Log messages appear as line-terminated comments, which visually offsets
  # them from the JSON output, even when both end up in the same terminal.
  logger = Logger(
    stream=stderr or sys.stderr, prefix='// ', use_color=args.color, verbose=args.verbose)

  try:
    if args.command == 'run':
      return _run(args, logger, stdout)
    if args.command == 'gen':
      return _gen(args, logger, stdout)
    if args.command == 'adversary':
      return _adversary(args, logger, stdout)
    if args.command == 'search':
      return _search(args, logger, stdout)
    if args.command == 'audit':
      return _audit(args, logger, stdout)
    return _client(args, logger, stdin, stdout)
  except (FairstreamError, OSError) as x:
    logger.error(x)
    logger.done(f'fairstream {args.command} failed.')
    return 2
