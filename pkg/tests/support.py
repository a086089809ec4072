"""Shared two-role session harness for protocol-level tests."""

import threading

from zkqbf.backend import PROVER, VERIFIER, Engine, SessionAbort
from zkqbf.wire import loopback_pair


def run_session(script, backend, bits=64, seed=b"test-seed", chal_seed=7,
                wrap_prover=None, record_payloads=False, timeout=60):
    """Run one script on both roles over a loopback pair.

    Returns ({role: ("ok", result) | ("abort", stage) | ("error", repr)},
    prover_channel, verifier_channel).
    """
    cp, cv = loopback_pair(record_payloads=record_payloads)
    prover_chan = wrap_prover(cp) if wrap_prover else cp
    results = {}

    def run(role, chan):
        eng = Engine(role, chan, backend=backend, bits=bits, dealer_seed=seed,
                     challenge_seed=chal_seed if role == VERIFIER else None)
        try:
            results[role] = ("ok", script(eng))
        except SessionAbort as e:
            results[role] = ("abort", e.stage)
        except Exception as e:  # surface harness bugs instead of hanging
            results[role] = ("error", repr(e))
        finally:
            chan.close()

    tp = threading.Thread(target=run, args=(PROVER, prover_chan))
    tv = threading.Thread(target=run, args=(VERIFIER, cv))
    tp.start()
    tv.start()
    tp.join(timeout=timeout)
    tv.join(timeout=timeout)
    assert not tp.is_alive() and not tv.is_alive(), "session deadlocked"
    return results, cp, cv


def verdict(results):
    """Collapse a results dict to ("accept",) or ("reject", stage)."""
    kind, info = results[VERIFIER]
    if kind == "ok":
        assert results[PROVER][0] == "ok", results
        return ("accept",)
    assert kind == "abort", results
    assert results[PROVER][0] == "abort", results
    return ("reject", info)
