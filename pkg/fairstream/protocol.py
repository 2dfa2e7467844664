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
The line protocol for external allocators. An allocator process reads
newline-delimited JSON from standard input and answers on standard output,
one UTF-8 encoded message per line, with all rationals as ``"p/q"`` strings.

The session starts with a header fixing the direction, number of agents,
deadline, and valuation classes, to which the allocator replies with
``{"ack":true}``. Every following server message reveals one item and must be
answered with one decision:

* ``{"round":2,"values":["10/1","1/10"]}`` reveals an additive item,
* ``{"round":3,"categories":["a",null],"marginals":["1/1","0/1"]}`` reveals a
  matroid item together with its marginals against the current bundles,
* ``{"round":6,"flush":true}`` asks for the recipient of the held item once
  the stream has ended.

Decisions are ``{"decision":"assign","agent":1}``, ``{"decision":"discard"}``,
or ``{"decision":"hold"}``, each with an optional ``"release"`` naming the
recipient of the previously held item. The session ends when the server closes
the allocator's standard input.

:py:class:`ExternalAllocator` drives an external allocator through a
:py:class:`Channel` and :py:class:`ClientSession` serves a builtin allocator
over the same protocol.
"""

from __future__ import annotations

import abc
import collections
import json
import queue
import subprocess
import threading

from typing import Any, Callable, Optional, Sequence, TextIO

from fairstream.algorithms import Allocator, create_allocator, ItemView, Setting
from fairstream.core import (
  Allocation,
  apply_decision,
  Decision,
  DecisionKind,
  Item,
  Representation,
  Stream,
)
from fairstream.error import (
  FairstreamError,
  ProtocolError,
  ProtocolTimeout,
  ValidationError,
)
from fairstream.ingest import ingest_decision, ingest_header
from fairstream.serde import dumps_line
from fairstream.validator import Validator
from fairstream.valuations import oracle_for, Oracle, ValuationClass

__all__ = [
  'DEFAULT_TIMEOUT',
  'header_message',
  'item_message',
  'flush_message',
  'parse_reply',
  'Channel',
  'ProcessChannel',
  'LoopbackChannel',
  'ExternalAllocator',
  'ConstantPolicy',
  'allocator_factory',
  'ClientSession',
  'serve',
]

DEFAULT_TIMEOUT: float = 10.0
"""The seconds to wait for an external allocator's reply."""

# --------------------------------------------------------------------------------------
# Messages

def header_message(setting: Setting, representation: Representation) -> dict[str, Any]:
  """Create the session header for the setting."""
  message: dict[str, Any] = {
    'direction': setting.direction.value,
    'n': setting.n,
    'deadline': setting.deadline,
  }
  if representation is not Representation.ADDITIVE:
    message['representation'] = representation.value
  if setting.profile:
    classes = {str(c) for c in setting.profile}
    if len(classes) == 1:
      message['class'] = str(setting.profile[0])
    else:
      message['classes'] = [str(c) for c in setting.profile]
  if setting.monotone:
    message['monotone'] = True
  return message

def item_message(view: ItemView) -> dict[str, Any]:
  """
  Create the message revealing the arriving item.

  :raises ProtocolError: indicates an explicit item, which has no row to reveal.
  """
  item = view.item
  if item.values is not None:
    return { 'round': item.id, 'values': list(item.values) }
  if item.categories is not None:
    marginals = [view.marginal(agent) for agent in range(1, view.allocation.n + 1)]
    return { 'round': item.id, 'categories': list(item.categories), 'marginals': marginals }
  raise ProtocolError(f'explicit item e{item.id} cannot be sent to an external allocator')

def flush_message(round: int) -> dict[str, Any]:
  return { 'round': round, 'flush': True }

def parse_reply(data: object, setting: Setting, what: str) -> Decision:
  """
  Parse and check a decision received from an external allocator.

  :raises ProtocolError: indicates a malformed decision or one the session
    forbids, such as discarding a chore or holding without deadline.
  """
  try:
    decision = ingest_decision(Validator(data, filename=what), setting.direction)
  except ValidationError as x:
    raise ProtocolError(f'malformed reply: {x}') from x
  for agent in (decision.agent, decision.release):
    if agent is not None and agent > setting.n:
      raise ProtocolError(f'{what} names agent {agent} of {setting.n}')
  if decision.kind is DecisionKind.HOLD and setting.deadline != 1:
    raise ProtocolError(f'{what} holds an item without deadline')
  return decision

# --------------------------------------------------------------------------------------
# Channels

class Channel(abc.ABC):
  """A bidirectional, message-oriented connection to an allocator."""

  @abc.abstractmethod
  def send(self, message: object) -> None: ...

  @abc.abstractmethod
  def receive(self) -> object:
    """
    Receive the next message.

    :raises ProtocolTimeout: indicates that the allocator did not answer in time.
    :raises ProtocolError: indicates malformed JSON or a closed connection.
    """

  def close(self) -> None:
    pass


class ProcessChannel(Channel):
  """
  A channel to an allocator running as a child process. A daemon thread reads
  the child's standard output, so that :py:meth:`receive` can time out.
  """

  def __init__(self, command: Sequence[str], timeout: float = DEFAULT_TIMEOUT) -> None:
    try:
      self._process = subprocess.Popen(
        list(command),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        encoding='utf8',
        bufsize=1,
      )
    except OSError as x:
      raise ProtocolError(f'cannot start allocator "{" ".join(command)}": {x}') from x
    self._timeout = timeout
    self._lines: queue.Queue[Optional[str]] = queue.Queue()
    self._reader = threading.Thread(target=self._read, daemon=True)
    self._reader.start()

  def _read(self) -> None:
    assert self._process.stdout is not None
    for line in self._process.stdout:
      self._lines.put(line)
    self._lines.put(None)

  def send(self, message: object) -> None:
    assert self._process.stdin is not None
    try:
      self._process.stdin.write(dumps_line(message))
      self._process.stdin.flush()
    except (BrokenPipeError, OSError) as x:
      raise ProtocolError('allocator process stopped reading') from x

  def receive(self) -> object:
    while True:
      try:
        line = self._lines.get(timeout=self._timeout)
      except queue.Empty:
        raise ProtocolTimeout(f'allocator did not answer within {self._timeout}s') from None
      if line is None:
        raise ProtocolError('allocator process ended the session')
      if line.strip():
        break
    try:
      return json.loads(line)
    except json.JSONDecodeError as x:
      raise ProtocolError(f'allocator sent malformed JSON: {x.msg}') from x

  def close(self) -> None:
    stdin = self._process.stdin
    if stdin is not None and not stdin.closed:
      try:
        stdin.close()
      except OSError:
        pass
    try:
      self._process.wait(timeout=self._timeout)
    except subprocess.TimeoutExpired:
      self._process.kill()
      self._process.wait()


class LoopbackChannel(Channel):
  """A channel to a :py:class:`ClientSession` in the same process."""

  def __init__(self, session: ClientSession) -> None:
    self._session = session
    self._replies: collections.deque[object] = collections.deque()

  def send(self, message: object) -> None:
    # Messages pass through JSON text, just like with a real process.
    text = dumps_line(message)
    reply = self._session.handle(json.loads(text))
    self._replies.append(json.loads(dumps_line(reply)))

  def receive(self) -> object:
    if not self._replies:
      raise ProtocolError('allocator ended the session')
    return self._replies.popleft()

# --------------------------------------------------------------------------------------
# The Server Side

class ExternalAllocator(Allocator):
  """
  An allocator answering through the line protocol. The session header is
  sent on construction; :py:meth:`close` ends the session.
  """

  name = 'external'

  def __init__(
    self,
    setting: Setting,
    channel: Channel,
    *,
    representation: Representation = Representation.ADDITIVE,
    strict: bool = True,
  ) -> None:
    super().__init__(setting, strict=strict)
    self._channel = channel
    channel.send(header_message(setting, representation))
    reply = channel.receive()
    if not isinstance(reply, dict) or reply.get('ack') is not True:
      raise ProtocolError(f'allocator did not acknowledge the header: {reply!r}')

  def check_item(self, view: ItemView) -> None:
    pass

  def decide(self, view: ItemView) -> Decision:
    self._channel.send(item_message(view))
    return parse_reply(self._channel.receive(), self._setting, f'reply to e{view.id}')

  def flush(self, allocation: Allocation, oracle: Oracle) -> Optional[int]:
    if allocation.held is None:
      return None
    self._channel.send(flush_message(allocation.round))
    what = f'flush of e{allocation.held}'
    decision = parse_reply(self._channel.receive(), self._setting, what)
    if decision.kind is not DecisionKind.ASSIGN or decision.release is not None:
      raise ProtocolError(f'{what} is {decision}, not a plain assignment')
    return decision.agent

  def close(self) -> None:
    self._channel.close()

  def __enter__(self) -> ExternalAllocator:
    return self

  def __exit__(self, *exc: object) -> None:
    self.close()

# --------------------------------------------------------------------------------------
# The Client Side

class ConstantPolicy(Allocator):
  """Assign every item and every held item to the same agent."""

  name = 'constant'

  def __init__(self, setting: Setting, *, strict: bool = True, agent: int = 1) -> None:
    super().__init__(setting, strict=strict)
    if not 1 <= agent <= setting.n:
      raise ProtocolError(f'constant agent {agent} is not in 1..{setting.n}')
    self._agent = agent

  def check_item(self, view: ItemView) -> None:
    pass

  def decide(self, view: ItemView) -> Decision:
    release = self._agent if view.allocation.held is not None else None
    return Decision.assign(self._agent, release)

  def flush(self, allocation: Allocation, oracle: Oracle) -> Optional[int]:
    return None if allocation.held is None else self._agent


AllocatorFactory = Callable[[Setting], Allocator]

def allocator_factory(name: str, strict: bool = False, **params: Any) -> AllocatorFactory:
  """Create a factory for the named builtin allocator or ``constant``."""
  if name == ConstantPolicy.name:
    return lambda setting: ConstantPolicy(setting, strict=strict, **params)
  return lambda setting: create_allocator(name, setting, strict, **params)


_MESSAGE_KEYS: set[str] = { 'round', 'values', 'categories', 'marginals', 'flush' }

class ClientSession:
  """
  The allocator side of one session. It mirrors the allocation from its own
  decisions, so that the allocator sees the same views it would see locally.
  """

  def __init__(self, factory: AllocatorFactory) -> None:
    self._factory = factory
    self._allocator: Optional[Allocator] = None
    self._stream: Optional[Stream] = None
    self._items: list[Item] = []
    self._allocation: Optional[Allocation] = None
    self._count = 0

  @property
  def allocator(self) -> Optional[Allocator]:
    return self._allocator

  @property
  def allocation(self) -> Optional[Allocation]:
    return self._allocation

  def handle(self, message: object) -> dict[str, Any]:
    """
    Handle one server message and return the reply.

    :raises ProtocolError: indicates a malformed or out-of-order message, or a
      failure of the allocator.
    """
    self._count += 1
    data = Validator(message, filename=f'message {self._count}')
    try:
      if self._allocator is None:
        return self._start(data)
      return self._step(data)
    except ProtocolError:
      raise
    except FairstreamError as x:
      raise ProtocolError(f'{type(x).__name__}: {x}') from x

  def _start(self, data: Validator[Any]) -> dict[str, Any]:
    fields = ingest_header(data)
    self._stream = Stream(items=(), **fields)
    profile = tuple(ValuationClass.parse(text) for text in self._stream.profile)
    setting = Setting(
      self._stream.direction, self._stream.n, self._stream.deadline, profile,
      self._stream.monotone,
    )
    self._allocator = self._factory(setting)
    self._allocation = Allocation.for_stream(self._stream)
    return { 'ack': True }

  def _step(self, data: Validator[Any]) -> dict[str, Any]:
    assert self._allocator is not None and self._stream is not None
    allocation = self._allocation
    assert allocation is not None
    stream = self._stream

    message = data.to_object(valid_keys=_MESSAGE_KEYS)
    round = message['round'].to_integer().value
    if message.has('flush'):
      if round != allocation.round:
        message['round'].raise_invalid(f'is not the last round {allocation.round}')
      oracle = oracle_for(stream.direction, stream.n, self._items, stream.representation)
      recipient = self._allocator.flush(allocation, oracle)
      if recipient is None:
        raise ProtocolError('flush without a held item')
      return Decision.assign(recipient).to_dict()

    if round != allocation.round + 1:
      message['round'].raise_invalid(f'is not the next round {allocation.round + 1}')
    values = message.optional('values')
    if values is not None:
      item = Item(round, values=values.to_row())
    else:
      item = Item(round, categories=message['categories'].to_labels())
    if item.width != stream.n:
      data.raise_invalid(f'reveals {item.width} entries for {stream.n} agents')

    self._items.append(item)
    oracle = oracle_for(stream.direction, stream.n, self._items, stream.representation)
    decision = self._allocator.step(ItemView(item, allocation, oracle))
    self._allocation = apply_decision(allocation, item, decision)
    return decision.to_dict()


def serve(
  factory: AllocatorFactory, input: TextIO, output: TextIO
) -> int:
  """
  Serve one session over the given text streams until the input ends. The
  result is the number of items decided on.

  :raises ProtocolError: indicates a malformed message, after an
    ``{"error":...}`` reply has been written.
  """
  session = ClientSession(factory)
  for line in input:
    if not line.strip():
      continue
    try:
      try:
        message = json.loads(line)
      except json.JSONDecodeError as x:
        raise ProtocolError(f'malformed JSON: {x.msg}') from x
      reply = session.handle(message)
    except ProtocolError as x:
      output.write(dumps_line({ 'error': str(x) }))
      output.flush()
      raise
    output.write(dumps_line(reply))
    output.flush()
  allocation = session.allocation
  return 0 if allocation is None else allocation.round
