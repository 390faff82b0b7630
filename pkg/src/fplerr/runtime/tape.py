"""LIFO tape recording overwritten state and control-flow tokens.

The forward sweep pushes the value a statement is about to overwrite (one
scalar or one array element per assignment) plus branch/trip-count tokens;
the backward sweep pops them in exact reverse order.  After a completed
adjoint run the tape is empty and push_count == pop_count.
"""

from __future__ import annotations


class Tape:
    __slots__ = ("_stack", "push_count", "pop_count", "peak")

    def __init__(self) -> None:
        self._stack: list = []
        self.push_count = 0
        self.pop_count = 0
        self.peak = 0

    def push(self, value) -> None:
        self._stack.append(value)
        self.push_count += 1
        if len(self._stack) > self.peak:
            self.peak = len(self._stack)

    def pop(self):
        # Underflow is a transform bug, not a user error.
        assert self._stack, "tape underflow"
        self.pop_count += 1
        return self._stack.pop()

    def __len__(self) -> int:
        return len(self._stack)

    @property
    def balanced(self) -> bool:
        return not self._stack and self.push_count == self.pop_count
