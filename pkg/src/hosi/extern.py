"""External evaluator protocol (HOSI/1): drive a child process as a black box.

Protocol, version ``HOSI/1``: the parent opens the session by writing the
handshake line ``HOSI/1 d=<d>``; afterwards the child reads lines of d
space-separated decimal floats on standard input and writes one decimal
float per line on standard output, flushing per batch.  Output order must
match input order.  Any protocol violation (child exit, malformed line,
non-finite value, timeout) aborts the run naming the offending 1-based
line number.

Estimator worker threads each get their own child process.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import threading

import numpy as np

from .core import BlackBoxFunction

PROTOCOL = "HOSI/1"


class ProtocolError(RuntimeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = "" if line is None else f" (line {line})"
        super().__init__(f"external evaluator{where}: {message}")


class _Session:
    """One child process plus a line reader with timeouts."""

    def __init__(self, command: str, dim: int, timeout: float):
        self.timeout = timeout
        self.lines_read = 0
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )
        # non-blocking stdin: select's "writable" only guarantees PIPE_BUF
        # bytes of space, and a blocking write of a larger slab can deadlock
        # against a child that is itself blocked writing its stdout
        os.set_blocking(self.proc.stdin.fileno(), False)
        self._buf = b""
        self._write(f"{PROTOCOL} d={dim}\n".encode())

    def _write(self, data: bytes) -> None:
        fd = self.proc.stdin.fileno()
        sent = 0
        while sent < len(data):
            _, ready, _ = select.select([], [fd], [], self.timeout)
            if not ready:
                raise ProtocolError(f"timed out after {self.timeout}s writing to child")
            try:
                sent += os.write(fd, data[sent:])
            except BlockingIOError:
                continue
            except (BrokenPipeError, OSError) as exc:
                raise ProtocolError(f"child closed stdin ({exc}); exit code {self.proc.poll()}") from None

    def _pop_line(self) -> str | None:
        nl = self._buf.find(b"\n")
        if nl < 0:
            return None
        line, self._buf = self._buf[:nl], self._buf[nl + 1 :]
        self.lines_read += 1
        return line.decode("utf-8", "replace").strip()

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        """Send one batch and collect one value per line, in order.

        Input is fed and output drained concurrently (the child may answer
        line by line, and a full stdout pipe would otherwise deadlock the
        batch write).
        """
        payload = "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in pts).encode()
        out = np.empty(pts.shape[0])
        got, sent = 0, 0
        in_fd = self.proc.stdin.fileno()
        out_fd = self.proc.stdout.fileno()
        while got < pts.shape[0]:
            line = self._pop_line()
            if line is not None:
                try:
                    val = float(line)
                except ValueError:
                    raise ProtocolError(f"malformed value {line!r}", self.lines_read) from None
                if not np.isfinite(val):
                    raise ProtocolError(f"non-finite value {line!r}", self.lines_read)
                out[got] = val
                got += 1
                continue
            wfds = [in_fd] if sent < len(payload) else []
            ready_r, ready_w, _ = select.select([out_fd], wfds, [], self.timeout)
            if not ready_r and not ready_w:
                raise ProtocolError(f"timed out after {self.timeout}s waiting for output", self.lines_read + 1)
            if ready_r:  # drain before feeding: frees the child to make progress
                chunk = os.read(out_fd, 65536)
                if not chunk:
                    raise ProtocolError(
                        f"child exited (code {self.proc.wait()}) before answering", self.lines_read + 1
                    )
                self._buf += chunk
            if ready_w:
                try:
                    sent += os.write(in_fd, payload[sent : sent + 65536])
                except BlockingIOError:
                    pass
                except (BrokenPipeError, OSError):
                    raise ProtocolError(
                        f"child closed stdin; exit code {self.proc.poll()}", self.lines_read + 1
                    ) from None
        return out

    def close(self) -> None:
        try:
            if self.proc.stdin:
                self.proc.stdin.close()
            self.proc.wait(timeout=2.0)
        except Exception:
            self.proc.kill()


class ExternalFunction(BlackBoxFunction):
    """Black box backed by a child process speaking HOSI/1.

    One session per calling thread; sessions are created lazily and closed
    by ``close()`` or the context manager.  Batches are capped to amortize
    pipe round trips without unbounded buffering.
    """

    def __init__(self, command: str, dim: int, timeout: float = 60.0, batch_size: int = 8192):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.command = command
        self.dim = dim
        self.timeout = timeout
        self.batch_size = batch_size
        self._local = threading.local()
        self._sessions: list[_Session] = []
        self._lock = threading.Lock()

    def _session(self) -> _Session:
        sess = getattr(self._local, "session", None)
        if sess is None:
            sess = _Session(self.command, self.dim, self.timeout)
            self._local.session = sess
            with self._lock:
                self._sessions.append(sess)
        return sess

    def _eval_batch(self, pts):
        sess = self._session()
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], self.batch_size):
            block = pts[start : start + self.batch_size]
            out[start : start + block.shape[0]] = sess.eval_batch(block)
        return out

    def close(self) -> None:
        with self._lock:
            for sess in self._sessions:
                sess.close()
            self._sessions.clear()
        self._local = threading.local()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):  # best effort
        try:
            self.close()
        except Exception:
            pass
