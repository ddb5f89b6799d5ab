import unittest

from system import Event, System


class RecordingSystem(System):
    """System that records the events it processes"""

    def __init__(self, event_callbacks=None) -> None:
        super().__init__(event_callbacks)
        self.processed = []

    def _process_queue_event(self, event: Event) -> None:
        self.processed.append(event.type)
        if event.type == "chain":
            self.send_event(Event("chained", event.time + 1.0))


class SystemTest(unittest.TestCase):
    """Test cases for the event-queue base"""

    def setUp(self):
        """Set up a recording system with a callback"""
        self.seen = []
        self.system = RecordingSystem(event_callbacks=[self.seen.append])

    def test_queue_runs_in_order(self):
        """Test queued events are processed first-in first-out"""
        self.system.send_event(Event("a", 0.0))
        self.system.send_event(Event("b", 1.0))
        self.assertEqual(self.system.processed, [])
        self.system.send_and_execute_event(Event("c", 2.0))
        self.assertEqual(self.system.processed, ["a", "b", "c"])

    def test_callbacks_see_every_event(self):
        """Test callbacks receive events including ones queued while processing"""
        self.system.send_and_execute_event(Event("chain", 0.0, index=3))
        self.assertEqual([e.type for e in self.seen], ["chain", "chained"])
        self.assertEqual(self.seen[0].data, {"index": 3})
        self.assertEqual(self.seen[1].time, 1.0)

    def test_repr(self):
        """Test the event representation names type and time"""
        self.assertIn("'symbol_start'", repr(Event("symbol_start", 0.5, level=2.0)))


if __name__ == "__main__":
    unittest.main()
