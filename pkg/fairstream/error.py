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
Errors specific to *fairstream*. Every error raised on purpose by this package
is an instance of :py:class:`FairstreamError`, so that the command line tool can
report them uniformly and let everything else propagate as a genuine bug.
"""

__all__ = [
  'FairstreamError',
  'ValidationError',
  'IllegalDecision',
  'OutOfRange',
  'UnknownItem',
  'BudgetExceeded',
  'ClassMismatch',
  'WrongAgentCount',
  'DeadlineUnsupported',
  'NotMonotone',
  'UnknownAdversary',
  'ConfigError',
  'ProtocolError',
  'ProtocolTimeout',
]

class FairstreamError(Exception):
  """
  The base class for errors specific to this package.
  """
  pass

class ValidationError(FairstreamError):
  """
  An error indicating that JSON data does not have expected fields or type.
  """
  pass

class IllegalDecision(FairstreamError):
  """
  An error indicating that an allocator made a decision the online model does
  not permit, e.g., discarding a chore or holding a second item.
  """
  pass

class OutOfRange(FairstreamError):
  """An error indicating a round index outside the stream."""
  pass

class UnknownItem(FairstreamError):
  """An error indicating that an oracle was asked about an item it lacks."""
  pass

class BudgetExceeded(FairstreamError):
  """
  An error indicating that exhaustive enumeration would visit more partitions,
  assignments, or game tree nodes than the configured budget allows.
  """
  pass

class ClassMismatch(FairstreamError):
  """
  An error indicating that an allocator's valuation class or direction
  precondition does not hold.
  """
  pass

class WrongAgentCount(FairstreamError):
  """An error indicating that an allocator needs a different number of agents."""
  pass

class DeadlineUnsupported(FairstreamError):
  """An error indicating a mismatch between allocator and stream deadline."""
  pass

class NotMonotone(FairstreamError):
  """
  An error indicating that some agent's values or costs are neither
  non-decreasing nor non-increasing along the stream.
  """
  pass

class UnknownAdversary(FairstreamError):
  """An error indicating that no adversary is registered under a name."""
  pass

class ConfigError(FairstreamError):
  """
  An error indicating an invalid option, generator specification, bound, or
  environment variable.
  """
  pass

class ProtocolError(FairstreamError):
  """
  An error indicating a malformed or illegal message on the line protocol for
  external allocators.
  """
  pass

class ProtocolTimeout(ProtocolError):
  """An error indicating that an external allocator did not answer in time."""
  pass
