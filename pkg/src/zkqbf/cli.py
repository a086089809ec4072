"""Command-line sessions: one prover and one verifier over TCP or in process.

The handshake settles everything public before any commitment: both
sides hash the normalized instance, the prover announces the session
parameters and the bucket plan, and the verifier answers with the dealer
seed for the correlated-randomness stream.  A disagreement aborts with
stage "handshake" and exit code 2; protocol rejects exit 1; accepts 0.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import socket
import sys
import threading
import time

from . import cube, qres
from . import strategy as strategies
from .backend import PROVER, VERIFIER, Engine, SessionAbort
from .certs import CertError, parse_strategy, parse_trace
from .oracle import OracleError, derive_substitution_refutation
from .qbf import QbfError, parse_qdimacs
from .qres import BucketPlan
from .wire import T_ABORT, T_HELLO, SocketChannel, TransportError, loopback_pair

VERSION = 1
MODES = ("qres", "cube", "herbrand", "skolem")
FIELD_BITS = (8, 16, 24, 32, 40, 48, 56, 64)
MAX_SLOTS = 1 << 20  # sanity cap on announced plan size

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_CONFIG = 2


class CliError(Exception):
    """Configuration, certificate, or handshake failure (exit code 2)."""


def instance_digest(qbf) -> str:
    """Digest of the normalized instance, stable across formatting."""
    blob = json.dumps([qbf.num_vars, qbf.prefix, qbf.clauses]).encode()
    return hashlib.sha256(blob).hexdigest()


def seed_material(seed: str | None) -> tuple[bytes, int | None]:
    """Dealer seed bytes and challenge seed; random unless --seed pins them."""
    if seed is None:
        return os.urandom(32), None
    dealer = hashlib.sha256(b"dealer:" + seed.encode()).digest()
    chal = int.from_bytes(hashlib.sha256(b"chal:" + seed.encode()).digest(), "big")
    return dealer, chal


# -- certificates -------------------------------------------------------------

def load_certificate(mode: str, qbf, text: str, chunk: int):
    """Parse the prover's certificate and derive the public announcement.

    Returns (params, plan, private) where params and the plan go into the
    hello frame and private holds whatever the protocol script commits.
    """
    try:
        if mode == "qres":
            header = next((ln for ln in text.splitlines()
                           if ln.strip() and not ln.lstrip().startswith("c")), "")
            kind = "prop" if "zkprop" in header.split() else "qres"
            trace = parse_trace(text, kind)
            plan = qres.plan_for_trace(qbf, trace, chunk=chunk)
            params = {"kind": trace.kind, "steps": len(trace.steps),
                      "width": trace.width, "degree": trace.degree}
            return params, plan, {"trace": trace}
        if mode == "cube":
            trace = parse_trace(text, "cube")
            plan = cube.plan_for_cubes(qbf, trace, chunk=chunk)
            params = {"cubes": len(trace.cubes), "steps": len(trace.steps),
                      "width": trace.width, "degree": trace.degree}
            return params, plan, {"trace": trace}
        strat = parse_strategy(text)
        if strat.kind != mode:
            raise CliError("certificate is a %s strategy, session mode is %s"
                           % (strat.kind, mode))
        try:
            _, _, trace = derive_substitution_refutation(qbf, strat)
        except OracleError as e:
            raise CliError("cannot refute the substitution of this strategy "
                           "(is it well formed and winning?): %s" % e) from None
        plan = strategies.plan_for_strategy(qbf, strat, trace, chunk=chunk)
        params = {"kind": mode, "gates": len(strat.gates),
                  "aux": strat.aux_count, "steps": len(trace.steps),
                  "width": trace.width}
        return params, plan, {"strategy": strat, "trace": trace}
    except CertError as e:
        raise CliError("bad certificate: %s" % e) from None


def check_params(mode: str, params: dict) -> dict:
    """Coerce announced parameters to ints and bound-check the shape."""
    keys = {"qres": ("steps", "width", "degree"),
            "cube": ("cubes", "steps", "width", "degree"),
            "herbrand": ("gates", "aux", "steps", "width"),
            "skolem": ("gates", "aux", "steps", "width")}[mode]
    out = {}
    for k in keys:
        v = int(params[k])
        if not 0 <= v <= MAX_SLOTS:
            raise ValueError("parameter %s out of range" % k)
        out[k] = v
    if mode == "qres":
        out["kind"] = str(params["kind"])
        if out["kind"] not in ("qres", "prop"):
            raise ValueError("bad trace kind")
    elif mode in ("herbrand", "skolem"):
        out["kind"] = mode
    return out


def plan_to_wire(plan: BucketPlan) -> dict:
    return {"buckets": list(plan.buckets),
            "slot_bucket": list(plan.slot_bucket),
            "step_sources": [list(p) for p in plan.step_sources]}


def plan_from_wire(obj: dict) -> BucketPlan:
    buckets = tuple(int(b) for b in obj["buckets"])
    slot_bucket = tuple(int(s) for s in obj["slot_bucket"])
    sources = tuple((int(a), int(b)) for a, b in obj["step_sources"])
    if len(slot_bucket) > MAX_SLOTS or len(buckets) > MAX_SLOTS:
        raise ValueError("plan too large")
    return BucketPlan(buckets, slot_bucket, sources)


# -- the session --------------------------------------------------------------

def run_protocol(eng: Engine, qbf, mode: str, params: dict,
                 plan: BucketPlan, private: dict) -> dict:
    if mode == "qres":
        return qres.check_proof(eng, qbf, params["kind"], params["steps"],
                                params["width"], params["degree"], plan=plan,
                                trace=private.get("trace"))
    if mode == "cube":
        return cube.check_cube_proof(eng, qbf, params["cubes"],
                                     params["steps"], params["width"],
                                     params["degree"], plan=plan,
                                     trace=private.get("trace"))
    return strategies.verify_strategy(eng, qbf, params["kind"],
                                      params["gates"], params["aux"],
                                      params["steps"], params["width"],
                                      plan=plan,
                                      strategy=private.get("strategy"),
                                      trace=private.get("trace"))


def _hello_abort(chan, why: str):
    try:
        chan.send(T_ABORT, b"handshake")
    except TransportError:
        pass
    raise CliError(why)


def handshake(chan, role: str, cfg: dict, announce=None):
    """Exchange hello frames; returns (params, plan, dealer_seed).

    The prover announces {mode, backend, bits, digest, params, plan}; the
    verifier checks every public field against its own flags and answers
    with the dealer seed.  Either side aborts with stage handshake.
    """
    if role == PROVER:
        params, plan = announce[0], announce[1]
        body = {"v": VERSION, "mode": cfg["mode"], "backend": cfg["backend"],
                "bits": cfg["bits"], "digest": cfg["digest"],
                "params": params, "plan": plan_to_wire(plan)}
        chan.send(T_HELLO, json.dumps(body).encode())
        tag, payload = chan.recv()
        if tag == T_ABORT:
            raise CliError("peer rejected the handshake")
        if tag != T_HELLO:
            _hello_abort(chan, "unexpected frame %d in handshake" % tag)
        reply = json.loads(payload)
        if reply.get("v") != VERSION or reply.get("digest") != cfg["digest"]:
            _hello_abort(chan, "verifier answered for a different session")
        return params, plan, bytes.fromhex(reply["seed"])

    tag, payload = chan.recv()
    if tag == T_ABORT:
        raise CliError("peer rejected the handshake")
    if tag != T_HELLO:
        _hello_abort(chan, "unexpected frame %d in handshake" % tag)
    try:
        body = json.loads(payload)
    except ValueError as e:
        _hello_abort(chan, "malformed hello: %s" % e)
    if body.get("v") != VERSION:
        _hello_abort(chan, "protocol version mismatch")
    for key in ("mode", "backend", "bits", "digest"):
        if body.get(key) != cfg[key]:
            _hello_abort(chan, "%s mismatch: peer says %r, we expect %r"
                         % (key, body.get(key), cfg[key]))
    try:
        params = check_params(cfg["mode"], body["params"])
        plan = plan_from_wire(body["plan"])
    except (ValueError, KeyError, TypeError) as e:
        _hello_abort(chan, "malformed hello: %s" % e)
    chan.send(T_HELLO, json.dumps({"v": VERSION, "digest": cfg["digest"],
                                   "seed": cfg["dealer_seed"].hex()}).encode())
    return params, plan, cfg["dealer_seed"]


def run_endpoint(role: str, chan, qbf, args, announce=None) -> dict:
    """One side of a session on an established channel; returns stats."""
    cfg = {"mode": args.mode, "backend": args.backend, "bits": args.field_bits,
           "digest": instance_digest(qbf)}
    dealer_seed, chal_seed = seed_material(args.seed)
    cfg["dealer_seed"] = dealer_seed

    stats = {"role": role, "mode": args.mode, "backend": args.backend,
             "bits": args.field_bits, "digest": cfg["digest"]}
    start = time.monotonic()
    verdict, stage = "accept", ""
    try:
        params, plan, seed = handshake(chan, role, cfg, announce)
        eng = Engine(role, chan, backend=args.backend, bits=args.field_bits,
                     dealer_seed=seed,
                     challenge_seed=chal_seed if role == VERIFIER else None)
        private = announce[2] if role == PROVER else {}
        result = run_protocol(eng, qbf, args.mode, params, plan, private)
        stats.update(result)
        stats.update(witness=eng.n_witness, mults=eng.n_mults,
                     popeq=eng.n_popeq)
        for k, v in params.items():
            stats.setdefault(k, v)
    except SessionAbort as e:
        verdict, stage = "reject", e.stage
    finally:
        stats.update(verdict=verdict, stage=stage,
                     elapsed=round(time.monotonic() - start, 6),
                     bytes_sent=chan.bytes_sent,
                     bytes_received=chan.bytes_received,
                     frames_sent=len(chan.sent_shapes),
                     frames_received=len(chan.recv_shapes))
    return stats


def open_channel(args):
    if args.listen:
        host, port = _hostport(args.listen, default_host="127.0.0.1")
        srv = socket.create_server((host, port))
        if args.port_file:
            with open(args.port_file, "w") as fh:
                fh.write("%d\n" % srv.getsockname()[1])
        srv.settimeout(args.timeout)
        try:
            conn, _ = srv.accept()
        except socket.timeout:
            raise CliError("no peer connected within %.0fs" % args.timeout) from None
        finally:
            srv.close()
        conn.settimeout(args.timeout)
        return SocketChannel(conn)
    host, port = _hostport(args.connect)
    last = None
    for _ in range(40):  # the peer's listener may still be coming up
        try:
            sock = socket.create_connection((host, port), timeout=args.timeout)
            sock.settimeout(args.timeout)
            return SocketChannel(sock)
        except OSError as e:
            last = e
            time.sleep(0.25)
    raise CliError("cannot connect to %s:%d: %s" % (host, port, last))


def _hostport(text: str, default_host: str | None = None):
    if ":" in text:
        host, _, port = text.rpartition(":")
    elif default_host is not None:
        host, port = default_host, text
    else:
        raise CliError("expected HOST:PORT, got %r" % text)
    try:
        return host, int(port)
    except ValueError:
        raise CliError("bad port in %r" % text) from None


def write_stats(path: str, stats: dict) -> None:
    with open(path, "w") as fh:
        for k, v in sorted(stats.items()):
            fh.write("%s=%s\n" % (k, v))


def exit_code(stats: dict) -> int:
    if stats["verdict"] == "accept":
        return EXIT_ACCEPT
    if stats["stage"] in ("transport", "handshake"):
        return EXIT_CONFIG
    return EXIT_REJECT


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zkqbf",
        description="Verify a private QBF certificate in zero knowledge "
                    "between a prover and a designated verifier.")
    p.add_argument("--role", choices=(PROVER, VERIFIER),
                   help="which endpoint this process plays")
    p.add_argument("--mode", choices=MODES, required=True,
                   help="certificate family for the session")
    p.add_argument("--qbf", required=True, metavar="FILE",
                   help="QDIMACS instance, shared by both sides")
    p.add_argument("--cert", metavar="FILE",
                   help="certificate file (prover only)")
    p.add_argument("--backend", choices=("cleartext", "itmac"),
                   default="itmac")
    p.add_argument("--field-bits", type=int, choices=FIELD_BITS, default=64)
    p.add_argument("--bucket-size", type=int, default=0, metavar="N",
                   help="clauses per width bucket; 0 keeps one uniform array")
    p.add_argument("--listen", metavar="[HOST:]PORT",
                   help="wait for the peer on this address")
    p.add_argument("--connect", metavar="HOST:PORT",
                   help="reach out to a listening peer")
    p.add_argument("--in-process", action="store_true",
                   help="run both endpoints locally over a loopback pair")
    p.add_argument("--seed", metavar="S",
                   help="pin dealer and challenge randomness (demo/tests)")
    p.add_argument("--stats-out", metavar="FILE",
                   help="write key=value session statistics here")
    p.add_argument("--port-file", metavar="FILE",
                   help="with --listen: write the bound port here")
    p.add_argument("--timeout", type=float, default=60.0,
                   help="socket timeout in seconds")
    return p


def check_args(args):
    transports = sum(1 for f in (args.listen, args.connect, args.in_process) if f)
    if transports != 1:
        raise CliError("pick exactly one of --listen, --connect, --in-process")
    if args.in_process:
        if not args.cert:
            raise CliError("--in-process needs --cert")
    else:
        if not args.role:
            raise CliError("--role is required with --listen/--connect")
        if args.role == PROVER and not args.cert:
            raise CliError("the prover needs --cert")
        if args.role == VERIFIER and args.cert:
            raise CliError("the verifier must not see the certificate")
    if args.seed is None and args.in_process:
        args.seed = os.urandom(8).hex()  # both threads must share one seed


def load_instance(path: str):
    try:
        with open(path) as fh:
            return parse_qdimacs(fh.read())
    except OSError as e:
        raise CliError("cannot read %s: %s" % (path, e)) from None
    except QbfError as e:
        raise CliError("bad instance: %s" % e) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        check_args(args)
        qbf = load_instance(args.qbf)
        announce = None
        if args.cert:
            try:
                with open(args.cert) as fh:
                    text = fh.read()
            except OSError as e:
                raise CliError("cannot read %s: %s" % (args.cert, e)) from None
            params, plan, private = load_certificate(args.mode, qbf, text,
                                                     args.bucket_size)
            announce = (params, plan, private)

        if args.in_process:
            cp, cv = loopback_pair()
            out = {}

            def side(role, chan, ann):
                out[role] = run_endpoint(role, chan, qbf, args, ann)
                chan.close()

            t = threading.Thread(target=side, args=(PROVER, cp, announce))
            t.start()
            try:
                side(VERIFIER, cv, None)
            finally:
                t.join()
            stats = out[VERIFIER]
            stats["prover_elapsed"] = out[PROVER]["elapsed"]
        else:
            chan = open_channel(args)
            try:
                stats = run_endpoint(args.role, chan, qbf, args, announce)
            finally:
                chan.close()
    except CliError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as e:
        print("error: transport: %s" % e, file=sys.stderr)
        return EXIT_CONFIG

    if args.stats_out:
        write_stats(args.stats_out, stats)
    if stats["verdict"] == "accept":
        print("accept")
    else:
        print("reject %s" % stats["stage"])
    return exit_code(stats)


if __name__ == "__main__":
    sys.exit(main())
