"""Scoped hierarchical profiler and leveled logging with `{}` formatting.

A ProfileSession owns one timing tree per thread.  `scoped("name")` is a
context manager: while a session is active it accumulates inclusive wall
time (monotonic clock) into a node named after the scope, aggregating
repeated entries at the same level by name; with no active session it is a
zero-cost passthrough.
"""

import sys
import threading
import time


class ProfileNode:
    __slots__ = ("name", "inclusive_ns", "call_count", "children")

    def __init__(self, name):
        self.name = name
        self.inclusive_ns = 0
        self.call_count = 0
        self.children = {}  # name -> ProfileNode, ordered by first entry

    def child(self, name):
        node = self.children.get(name)
        if node is None:
            node = ProfileNode(name)
            self.children[name] = node
        return node

    def total_child_ns(self):
        return sum(c.inclusive_ns for c in self.children.values())


_tls = threading.local()


def _active_session():
    return getattr(_tls, "session", None)


class ProfileSession:
    """Per-thread profiling session; activate with `with session:`."""

    def __init__(self):
        self.root = ProfileNode("")
        self._stack = [self.root]
        self.failure_path = None  # deepest scope path at first raise

    def __enter__(self):
        if _active_session() is not None:
            raise RuntimeError("a profiler session is already active on this thread")
        _tls.session = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _tls.session = None
        return False

    @property
    def current(self):
        return self._stack[-1]

    def scope_path(self):
        """Names of the currently open scopes, outermost first."""
        return [n.name for n in self._stack[1:]]

    def _push(self, name):
        node = self.current.child(name)
        self._stack.append(node)
        return node

    def _pop(self, node, elapsed_ns):
        assert self._stack[-1] is node
        self._stack.pop()
        node.inclusive_ns += elapsed_ns
        node.call_count += 1


class scoped:
    """Context manager timing its body under the active session."""

    __slots__ = ("name", "_node", "_t0", "_session")

    def __init__(self, name):
        self.name = name
        self._session = None

    def __enter__(self):
        self._session = _active_session()
        if self._session is not None:
            self._node = self._session._push(self.name)
            self._t0 = time.perf_counter_ns()
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._session is not None:
            if exc_type is not None and self._session.failure_path is None:
                self._session.failure_path = "/".join(self._session.scope_path())
            elapsed = time.perf_counter_ns() - self._t0
            self._session._pop(self._node, elapsed)
        return False


def merge_sessions(sessions):
    """Merge trees node-by-node by name (for per-thread sessions)."""
    merged = ProfileSession()

    def rec(dst, srcs):
        for src in srcs:
            for name, child in src.children.items():
                node = dst.child(name)
                node.inclusive_ns += child.inclusive_ns
                node.call_count += child.call_count
        names = {}
        for src in srcs:
            for name, child in src.children.items():
                names.setdefault(name, []).append(child)
        for name, childs in names.items():
            rec(dst.children[name], childs)

    rec(merged.root, [s.root for s in sessions])
    return merged


def _fmt_ns(ns):
    if ns >= 1e9:
        return f"{ns / 1e9:.3f} s"
    if ns >= 1e6:
        return f"{ns / 1e6:.3f} ms"
    if ns >= 1e3:
        return f"{ns / 1e3:.3f} us"
    return f"{ns} ns"


def report(session: ProfileSession) -> str:
    """Human-readable table: name, inclusive time, % of parent, calls.

    A `(self)` row is added where children do not cover the parent, so the
    percentages within one parent sum to 100.
    """
    root = session.root
    if not root.children:
        return "no samples\n"
    lines = [f"{'scope':<40} {'inclusive':>12} {'% parent':>9} {'calls':>8}"]
    total = root.total_child_ns()

    def walk(node, depth, parent_ns):
        pct = 100.0 * node.inclusive_ns / parent_ns if parent_ns > 0 else 100.0
        name = "  " * depth + node.name
        lines.append(f"{name:<40} {_fmt_ns(node.inclusive_ns):>12} "
                     f"{pct:>8.1f}% {node.call_count:>8}")
        if node.children:
            for child in node.children.values():
                walk(child, depth + 1, node.inclusive_ns)
            self_ns = node.inclusive_ns - node.total_child_ns()
            self_pct = (100.0 * self_ns / node.inclusive_ns
                        if node.inclusive_ns > 0 else 0.0)
            name = "  " * (depth + 1) + "(self)"
            lines.append(f"{name:<40} {_fmt_ns(self_ns):>12} {self_pct:>8.1f}%")

    for child in root.children.values():
        walk(child, 0, total)
    res_ns = time.get_clock_info("perf_counter").resolution * 1e9
    lines.append(f"timer resolution: {res_ns:.0f} ns")
    return "\n".join(lines) + "\n"


def machine_report(session: ProfileSession) -> str:
    """One `path;inclusive_ns;count` line per node."""
    lines = []

    def walk(node, prefix):
        path = f"{prefix}/{node.name}" if prefix else node.name
        lines.append(f"{path};{node.inclusive_ns};{node.call_count}")
        for child in node.children.values():
            walk(child, path)

    for child in session.root.children.values():
        walk(child, "")
    return "\n".join(lines) + ("\n" if lines else "")


# --- logging ---------------------------------------------------------------

LEVELS = ("trace", "debug", "info", "warn", "error")
_LEVEL_RANK = {name: i for i, name in enumerate(LEVELS)}


class FormatError(ValueError):
    pass


def format_message(template: str, args) -> str:
    """Replace each `{}` with the next argument; `{{`/`}}` escape braces.

    The placeholder count must equal the argument count.
    """
    out = []
    i = 0
    used = 0
    n = len(template)
    while i < n:
        ch = template[i]
        if ch == "{":
            if template.startswith("{{", i):
                out.append("{")
                i += 2
                continue
            if template.startswith("{}", i):
                if used >= len(args):
                    raise FormatError(
                        f"template has more placeholders than arguments "
                        f"({len(args)} given): {template!r}")
                out.append(str(args[used]))
                used += 1
                i += 2
                continue
            raise FormatError(f"stray '{{' at index {i} in {template!r}")
        if ch == "}":
            if template.startswith("}}", i):
                out.append("}")
                i += 2
                continue
            raise FormatError(f"stray '}}' at index {i} in {template!r}")
        out.append(ch)
        i += 1
    if used != len(args):
        raise FormatError(
            f"template has {used} placeholders but {len(args)} arguments: "
            f"{template!r}")
    return "".join(out)


class LogRecord:
    __slots__ = ("level", "message", "wall_time", "mono_ns")

    def __init__(self, level, message):
        self.level = level
        self.message = message
        self.wall_time = time.time()
        self.mono_ns = time.perf_counter_ns()


class Logger:
    """Leveled logger; sinks receive records serially, in emission order."""

    def __init__(self, min_level="info", sinks=None):
        if min_level not in _LEVEL_RANK:
            raise ValueError(f"unknown level {min_level!r}")
        self.min_level = min_level
        self.sinks = sinks if sinks is not None else [stderr_sink]
        self._lock = threading.Lock()

    def log(self, level, template, *args):
        if level not in _LEVEL_RANK:
            raise ValueError(f"unknown level {level!r}")
        message = format_message(template, args)
        if _LEVEL_RANK[level] < _LEVEL_RANK[self.min_level]:
            return
        record = LogRecord(level, message)
        with self._lock:
            for sink in self.sinks:
                sink(record)

    def trace(self, template, *args):
        self.log("trace", template, *args)

    def debug(self, template, *args):
        self.log("debug", template, *args)

    def info(self, template, *args):
        self.log("info", template, *args)

    def warn(self, template, *args):
        self.log("warn", template, *args)

    def error(self, template, *args):
        self.log("error", template, *args)


def stderr_sink(record: LogRecord):
    print(f"[{record.level.upper():>5}] {record.message}", file=sys.stderr)


class MemorySink:
    def __init__(self):
        self.records = []

    def __call__(self, record):
        self.records.append(record)


LOG = Logger()
