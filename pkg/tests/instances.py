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

"""Hand-written instances shared by several tests."""

from fractions import Fraction
from typing import Any, Optional, Sequence

from fairstream.core import Decision, Direction, Item, Representation, Stream

def additive(
  direction: Direction, rows: Sequence[Sequence[Any]], **options: Any
) -> Stream:
  """Create an additive stream from rows of integers, strings, or rationals."""
  items = tuple(
    Item(index, values=tuple(Fraction(v) for v in row))
    for index, row in enumerate(rows, start=1)
  )
  return Stream(direction, len(rows[0]) if rows else options.pop('n'), items, **options)

def matroid(
  direction: Direction, rows: Sequence[Sequence[Optional[str]]], **options: Any
) -> Stream:
  """Create a matroid stream from rows of category labels."""
  items = tuple(
    Item(index, categories=tuple(row)) for index, row in enumerate(rows, start=1))
  return Stream(
    direction, len(rows[0]), items, representation=Representation.MATROID, **options)

# The five-item, three-agent goods instance walked through round by round
# when introducing the fairness notions.
EXAMPLE_ROWS = [
  (6, 5, 12),
  (4, 8, 6),
  (5, 10, 6),
  (9, 2, 8),
  (3, 5, 4),
]
EXAMPLE_DECISIONS = tuple(Decision.assign(a) for a in (1, 2, 3, 1, 1))

def example_stream() -> Stream:
  return additive(Direction.GOODS, EXAMPLE_ROWS)
