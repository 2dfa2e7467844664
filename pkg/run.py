#!/usr/bin/env python3

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
Developer tasks for fairstream. Each task is a function decorated with
``@task``; ``./run.py typecheck test`` runs the named tasks in order and stops
at the first failure. Tasks run with the current Python, so activate the
project's virtual environment first.
"""

import argparse
import functools
import os
from pathlib import Path
import shutil
from subprocess import CalledProcessError, CompletedProcess, run as subprocess_run
import sys
from typing import Any, Callable, Dict, List, Optional, TextIO, Union

ROOT: Path = Path(__file__).resolve().parent
PROG: str = sys.argv[0][2:] if sys.argv[0].startswith('./') else sys.argv[0]

# --------------------------------------------------------------------------------------

class Console:
  """A console for announcing tasks, in color if the stream is a terminal."""
  def __init__(self, *, in_color: Optional[bool] = None, verbose: bool = False,
               stream: TextIO = sys.stderr) -> None:
    self.verbose = verbose
    self.stream = stream
    self.in_color = stream.isatty() if in_color is None else in_color

  def _println(self, on: str, message: str, off: str) -> None:
    if self.in_color:
      message = f'\x1b[{on}m{message}\x1b[{off}m'
    self.stream.write(f'{PROG} >> {message}\n')

  def trace(self, message: str) -> None:
    if self.verbose:
      self._println('1', message, '0')

  def announce(self, message: str) -> None:
    self._println('1;45;38;5;231', message, '0;49;39')

  def error(self, message: str) -> None:
    self._println('1;31', message, '0;39')

console: Console

def execute(*command: Union[str, Path], **kwargs: Any) -> CompletedProcess:
  """Run the command in a subprocess, raising an exception on failure."""
  cmd = [str(c) for c in command]
  console.trace(' '.join(cmd))
  return subprocess_run(cmd, check=True, cwd=ROOT, **kwargs)

# --------------------------------------------------------------------------------------

TaskT = Callable[[], None]
tasks: Dict[str, TaskT] = {}

def task(fn: TaskT) -> TaskT:
  """Register the function as a task."""
  @functools.wraps(fn)
  def wrapper() -> None:
    console.announce(fn.__name__)
    fn()
  tasks[fn.__name__] = wrapper
  return fn

@task
def clean() -> None:
  """delete build artifacts"""
  for path in (ROOT / 'dist', ROOT / 'docs' / '_build', ROOT / '.pytest_cache'):
    console.trace(f'delete directory {path}')
    shutil.rmtree(path, ignore_errors=True)

@task
def typecheck() -> None:
  """run static code inspections"""
  execute('mypy', *(['--pretty'] if console.verbose else []))

@task
def test() -> None:
  """run tests while also determining coverage"""
  execute(sys.executable, '-m', 'pytest', '--cov=fairstream',
          *(['-vv'] if console.verbose else []))

@task
def soak() -> None:
  """run the property suites with many more seeds"""
  env = dict(os.environ, FAIRSTREAM_SEEDS=os.environ.get('FAIRSTREAM_SEEDS', '2000'))
  execute(sys.executable, '-m', 'pytest', '-q', env=env)

@task
def certify() -> None:
  """solve every builtin adversary's game from the command line"""
  from fairstream.adversaries import BUILTIN_ADVERSARIES
  for name in sorted(BUILTIN_ADVERSARIES):
    execute(sys.executable, '-m', 'fairstream', 'search', name, '--format', 'none',
            *(['--verbose'] if console.verbose else []))

@task
def document() -> None:
  """build documentation"""
  docs = ROOT / 'docs'
  # Sphinx warns about a missing _static directory.
  os.makedirs(docs / '_static', exist_ok=True)
  execute('sphinx-build', '-M', 'html', docs, docs / '_build')

@task
def build() -> None:
  """build binary and source distributions"""
  execute('flit', 'build')

# --------------------------------------------------------------------------------------

def create_parser() -> argparse.ArgumentParser:
  width = max(len(name) for name in tasks) + 2
  epilog = 'tasks:\n' + ''.join(
    f'  {name.ljust(width)}{fn.__doc__}\n' for name, fn in tasks.items())
  parser = argparse.ArgumentParser(
    prog=PROG, epilog=epilog, allow_abbrev=False,
    formatter_class=argparse.RawDescriptionHelpFormatter,
  )
  parser.add_argument('--color', action=argparse.BooleanOptionalAction,
                      help='force or prevent the use of color')
  parser.add_argument('-v', '--verbose', action='store_true', help='enable verbose mode')
  parser.add_argument('tasks', metavar='TASK', nargs='+', choices=tasks.keys(),
                      help='run the task as described below')
  return parser

def main(argv: Optional[List[str]] = None) -> int:
  args = create_parser().parse_args(argv)
  global console
  console = Console(in_color=args.color, verbose=args.verbose)

  # The first failure stops the remaining tasks.
  name = ''
  try:
    for name in args.tasks:
      tasks[name]()
  except CalledProcessError as x:
    console.error(f'{name} returned exit code {x.returncode}')
    return 1
  except Exception as x:
    console.error(f'{name} failed: {x}')
    return 1
  return 0

if __name__ == '__main__':
  sys.exit(main())
