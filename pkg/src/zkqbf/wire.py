"""Framed transport between prover and verifier.

Every message is one frame: a 4-byte little-endian payload length, a
1-byte type tag, then the payload.  Field elements travel as k/8-byte
little-endian integers.  Channels count bytes in both directions and
record the (tag, length) shape sequence, which the leakage tests compare
across runs; they can also retain raw payloads for the witness-absence
scan.
"""

from __future__ import annotations

import queue
import socket
import struct

_HEADER = struct.Struct("<IB")

# frame type tags
T_HELLO = 1     # handshake: version, parameters, instance digest
T_WITNESS = 2   # prover -> verifier: batch of commitment corrections
T_CHAL = 3      # verifier -> prover: random challenge element(s)
T_MUL = 4       # prover -> verifier: product commitment corrections
T_OPEN = 5      # prover -> verifier: batched opening (combined mac)
T_MULCHECK = 6  # prover -> verifier: aggregated multiplication proof
T_VERDICT = 7   # verifier -> prover: final accept
T_ABORT = 8     # either direction: reject, payload names the stage

TAG_NAMES = {
    T_HELLO: "hello", T_WITNESS: "witness", T_CHAL: "chal", T_MUL: "mul",
    T_OPEN: "open", T_MULCHECK: "mulcheck", T_VERDICT: "verdict",
    T_ABORT: "abort",
}


class TransportError(Exception):
    pass


def pack_elems(bits: int, values) -> bytes:
    n = bits // 8
    return b"".join(v.to_bytes(n, "little") for v in values)


def unpack_elems(bits: int, payload: bytes) -> list[int]:
    n = bits // 8
    if len(payload) % n:
        raise TransportError("payload of %d bytes is not a run of %d-byte elements"
                             % (len(payload), n))
    return [int.from_bytes(payload[i:i + n], "little")
            for i in range(0, len(payload), n)]


class Channel:
    """Base transport: framing, accounting, shape/payload recording."""

    def __init__(self, record_payloads: bool = False):
        self.bytes_sent = 0
        self.bytes_received = 0
        self.sent_shapes: list[tuple[int, int]] = []
        self.recv_shapes: list[tuple[int, int]] = []
        self.record_payloads = record_payloads
        self.sent_payloads: list[bytes] = []

    def send(self, tag: int, payload: bytes = b"") -> None:
        if len(payload) > 0xFFFFFFFF:
            raise TransportError("payload too large")
        self.bytes_sent += _HEADER.size + len(payload)
        self.sent_shapes.append((tag, len(payload)))
        if self.record_payloads:
            self.sent_payloads.append(payload)
        self._send_bytes(_HEADER.pack(len(payload), tag) + payload)

    def recv(self) -> tuple[int, bytes]:
        head = self._recv_bytes(_HEADER.size)
        length, tag = _HEADER.unpack(head)
        if tag not in TAG_NAMES:
            raise TransportError("unknown frame tag %d" % tag)
        payload = self._recv_bytes(length) if length else b""
        self.bytes_received += _HEADER.size + length
        self.recv_shapes.append((tag, length))
        return tag, payload

    def close(self) -> None:
        pass

    def _send_bytes(self, data: bytes) -> None:
        raise NotImplementedError

    def _recv_bytes(self, n: int) -> bytes:
        raise NotImplementedError


class LoopbackChannel(Channel):
    """One endpoint of an in-process queue pair."""

    def __init__(self, out_q: queue.Queue, in_q: queue.Queue, **kw):
        super().__init__(**kw)
        self._out = out_q
        self._in = in_q
        self._buf = b""

    def _send_bytes(self, data: bytes) -> None:
        self._out.put(data)

    def _recv_bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            chunk = self._in.get(timeout=30)
            if chunk is None:
                raise TransportError("peer closed")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def close(self) -> None:
        self._out.put(None)


def loopback_pair(**kw) -> tuple[LoopbackChannel, LoopbackChannel]:
    a, b = queue.Queue(), queue.Queue()
    return LoopbackChannel(a, b, **kw), LoopbackChannel(b, a, **kw)


class SocketChannel(Channel):
    def __init__(self, sock: socket.socket, **kw):
        super().__init__(**kw)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock

    def _send_bytes(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as e:
            raise TransportError("send failed: %s" % e) from None

    def _recv_bytes(self, n: int) -> bytes:
        chunks = []
        got = 0
        while got < n:
            try:
                chunk = self._sock.recv(min(n - got, 1 << 16))
            except OSError as e:
                raise TransportError("recv failed: %s" % e) from None
            if not chunk:
                raise TransportError("stream truncated (%d of %d bytes)" % (got, n))
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class TamperChannel(Channel):
    """Wraps a channel and flips one payload bit of the n-th sent frame.

    Models an active network attacker for the integrity tests; framing
    itself is left intact so the session fails at a MAC or consistency
    check rather than at the codec.
    """

    def __init__(self, inner: Channel, frame_index: int, byte_offset: int,
                 bit: int = 0):
        super().__init__()
        self._inner = inner
        self._frame_index = frame_index
        self._byte_offset = byte_offset
        self._bit = bit
        self._count = 0
        self.tampered = False

    def send(self, tag: int, payload: bytes = b"") -> None:
        if self._count == self._frame_index and payload:
            m = bytearray(payload)
            pos = self._byte_offset % len(m)
            m[pos] ^= 1 << (self._bit & 7)
            payload = bytes(m)
            self.tampered = True
        self._count += 1
        self._inner.send(tag, payload)

    def recv(self) -> tuple[int, bytes]:
        return self._inner.recv()

    def close(self) -> None:
        self._inner.close()

    @property
    def bytes_sent(self):
        return self._inner.bytes_sent

    @bytes_sent.setter
    def bytes_sent(self, v):
        pass

    @property
    def bytes_received(self):
        return self._inner.bytes_received

    @bytes_received.setter
    def bytes_received(self, v):
        pass

    @property
    def sent_shapes(self):
        return self._inner.sent_shapes

    @sent_shapes.setter
    def sent_shapes(self, v):
        pass

    @property
    def recv_shapes(self):
        return self._inner.recv_shapes

    @recv_shapes.setter
    def recv_shapes(self, v):
        pass
