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
The console logger for the command line tool. Reports and instance files go to
standard output or files; everything the logger writes goes to standard error,
with each line starting with the prefix, by default nothing, and the first line
of each entry with an emoji for its level.
"""

import enum
import sys

from fairstream import serde
from typing import Any, Sequence, TextIO, Union

__all__ = ['pluralize', 'Level', 'Logger', 'Style']

def pluralize(count: int, noun: str, suffix: str = 's') -> str:
  return noun + suffix if count != 1 else noun


class Level(enum.Enum):
  ERROR = '🛑  '
  WARN = '⚠️  '
  INFO = 'ℹ️  '


class Style(enum.Enum):
  """ANSI select graphic rendition codes for turning a style on and off."""
  BOLD = ('1', '22')
  GREEN = ('32;1', '39;22')
  RED = ('31;1', '39;22')


class Logger:
  """
  A colorful console logger. Styles are only rendered as ANSI escape codes if
  the stream is a TTY and ``use_color`` is true. In verbose mode, the logger
  also prints :py:meth:`detail` messages, which the tool uses for per-round
  traces. The logger counts errors and warnings, and :py:meth:`done` signs off
  in green or red depending on whether there were errors.
  """
  def __init__(
    self,
    stream: TextIO = sys.stderr,
    prefix: str = '',
    use_color: bool = True,
    use_emoji: bool = True,
    verbose: bool = False,
  ) -> None:
    self._stream = stream
    self._prefix = prefix
    self._styled = use_color and stream.isatty()
    self._use_emoji = use_emoji
    self._verbose = verbose
    self._counts = { level: 0 for level in Level }

  @property
  def error_count(self) -> int:
    return self._counts[Level.ERROR]

  @property
  def warning_count(self) -> int:
    return self._counts[Level.WARN]

  def print(self, text: str = '', style: Union[Style, None] = None) -> None:
    """Log the text, prefixing every line and truncating very long text."""
    if len(text) > 5_000:
      text = text[:5_000] + '...'
    if style is not None and self._styled:
      on, off = style.value
      text = f'\x1b[{on}m{text}\x1b[{off}m'
    self._stream.write(self._prefix + text.replace('\n', '\n' + self._prefix) + '\n')

  def print_table(self, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """
    Log a plain text table with left-aligned columns. Rationals are rendered
    as ``p/q`` and ``None`` as a dash.
    """
    def cell(value: Any) -> str:
      if value is None:
        return '-'
      prepared = serde.prepare(value)
      return prepared if isinstance(prepared, str) else serde.dumps(prepared)

    cells = [[cell(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(row[i]) for row in cells]) for i, h in enumerate(header)]

    def line(values: Sequence[str]) -> str:
      return '  '.join(v.ljust(w) for v, w in zip(values, widths)).rstrip()

    self.print(line(header), Style.BOLD)
    for row in cells:
      self.print(line(row))

  def _entry(self, level: Level, message: Union[str, BaseException], extras: Sequence[Any]) -> None:
    self._counts[level] += 1
    if isinstance(message, BaseException):
      text = type(message).__name__
      if message.args:
        text += f': {message.args[0]}'
        extras = tuple(message.args[1:]) + tuple(extras)
    else:
      text = message
    self.print((level.value if self._use_emoji else '') + text, Style.BOLD)
    for extra in extras:
      self.print(extra if isinstance(extra, str) else serde.dumps(extra, indent=2))

  def error(self, message: Union[str, BaseException], *extras: Any) -> None:
    """
    Log an error. An exception is shown as its type and first argument, with
    any further arguments following as extras. Extras that are not strings are
    logged as indented JSON.
    """
    self._entry(Level.ERROR, message, extras)

  def warn(self, message: Union[str, Warning], *extras: Any) -> None:
    self._entry(Level.WARN, message, extras)

  def info(self, message: str, *extras: Any) -> None:
    self._entry(Level.INFO, message, extras)

  def detail(self, message: str) -> None:
    """Log the message without decoration, but only in verbose mode."""
    if self._verbose:
      self.print(message)

  def done(self, message: str) -> None:
    """Sign off, in red if any errors were logged and in green otherwise."""
    self.print(message, Style.RED if self.error_count > 0 else Style.GREEN)
