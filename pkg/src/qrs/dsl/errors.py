"""Diagnostics raised by the identity language front-end."""
from ..errors import QRSError


class DSLError(QRSError):
    def __init__(self, message, line=None, col=None, source=None):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(self.render())

    @property
    def position(self):
        return (self.line, self.col)

    def render(self) -> str:
        kind = type(self).__name__
        if self.line is None:
            return f"{kind}: {self.message}"
        head = f"{kind} at {self.line}:{self.col}: {self.message}"
        if self.source is None:
            return head
        lines = self.source.splitlines()
        if 1 <= self.line <= len(lines):
            text = lines[self.line - 1]
            caret = " " * (self.col - 1) + "^"
            return f"{head}\n  {text}\n  {caret}"
        return head

    def with_source(self, source):
        if self.source is None:
            self.source = source
            self.args = (self.render(),)
        return self


class LexError(DSLError):
    pass


class ParseError(DSLError):
    def __init__(self, message, line=None, col=None, source=None, expected=()):
        self.expected = tuple(expected)
        super().__init__(message, line, col, source)


class BindError(DSLError):
    def __init__(self, message, line=None, col=None, source=None, name=None):
        self.name = name
        super().__init__(message, line, col, source)


class RegimeError(DSLError):
    pass
