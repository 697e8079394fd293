"""Exception hierarchy.

Errors split into two families: ``DangSimError`` subclasses raised for bad
input (sizes, traces, wild stores), and ``InternalBug`` subclasses that
signal a broken runtime invariant and must never fire in a correct build.
"""


class DangSimError(Exception):
    pass


class SizeOutOfRange(DangSimError, ValueError):
    pass


class AlignmentError(DangSimError, ValueError):
    pass


class NotAPointer(DangSimError, ValueError):
    pass


class OutOfSimMemory(DangSimError, MemoryError):
    pass


class WildStore(DangSimError):
    pass


class InvalidFree(DangSimError):
    pass


class ParseError(DangSimError):
    def __init__(self, msg, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + msg)


class TraceError(DangSimError):
    """A trace event could not be executed or one of its expectations failed."""

    def __init__(self, index, msg):
        self.index = index
        super().__init__(f"event {index}: {msg}")


class InternalBug(DangSimError, AssertionError):
    pass


class DuplicateID(InternalBug):
    pass


class AccountingBug(InternalBug):
    pass


class UseAfterRelease(InternalBug):
    pass


class PrematureFree(InternalBug):
    def __init__(self, obj_id, refs):
        self.obj_id = obj_id
        self.refs = list(refs)
        shown = ", ".join(hex(a) for a in self.refs[:4])
        super().__init__(
            f"object {obj_id:#x} released with {len(self.refs)} live reference(s): {shown}"
        )
