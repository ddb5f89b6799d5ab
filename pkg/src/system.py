"""
Event-queue base for the time-stepped simulators.
"""

from abc import ABC, abstractmethod
from collections import deque
from typing import Callable, Deque, List, Optional


class Event:
    """A simulator event raised at a given simulation time."""

    # pylint: disable=redefined-builtin
    def __init__(self, type: str, time: float, **data) -> None:
        self.type = type
        self.time = time
        self.data = data

    def __repr__(self) -> str:
        return f"Event({self.type!r}, t={self.time:.6g}, {self.data})"


EventCallback = Callable[[Event], None]


class System(ABC):
    """
    Base class for all simulators.
    Events are queued and processed in order; every processed event is
    passed to the registered callbacks first.
    """

    def __init__(self, event_callbacks: Optional[List[EventCallback]] = None) -> None:
        self.event_queue: Deque[Event] = deque()
        self.event_callbacks: List[EventCallback] = list(event_callbacks or [])

    def send_event(self, event: Event) -> None:
        """Queue an event. It runs on the next _process_all_queue_events."""
        self.event_queue.append(event)

    def send_and_execute_event(self, event: Event) -> None:
        """Sends an event and executes it immediately."""
        self.send_event(event)
        self._process_all_queue_events()

    def _notify_callbacks(self, event: Event) -> None:
        for callback in self.event_callbacks:
            callback(event)

    def _process_all_queue_events(self) -> None:
        """
        Processes elements on the event queue until the queue is empty.
        """
        while self.event_queue:
            event = self.event_queue.popleft()
            self._notify_callbacks(event)
            self._process_queue_event(event)

    @abstractmethod
    def _process_queue_event(self, event: Event) -> None:
        """
        Processes events in the queue.
        """
