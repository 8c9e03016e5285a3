"""Shared suite of small NRAM programs over one unary input f.

Every program ends with ACCEPT. Together they use all twelve instruction
types; GUESS, memory across blocks, and plain rejection all occur.
"""
from ntisp.nram import assemble

SIG = ".sig func f/1\n"


def _text(body: str, d: int = 1) -> str:
    lines = [ln.strip() for ln in body.strip().splitlines()]
    text = SIG + (f".d {d}\n" if d != 1 else "")
    return text + "\n".join(f"{i}: {ln}" for i, ln in enumerate(lines, 1)) + "\n"


def _prog(body: str, d: int = 1):
    return assemble(_text(body, d))


SOURCES = {
    "accept": ("ACCEPT", 1),
    "reject": ("REJECT\nACCEPT", 1),
    "fixed_point": ("GUESS\nSETB 1\nREAD f\nIFEQ 1 6 5\nREJECT\nACCEPT", 1),
    "f0_is_0": ("ZERO\nSETB 1\nREAD f\nIFEQ 1 6 5\nREJECT\nACCEPT", 1),
    "f_last_is_last": ("SETL\nDEC\nSETB 1\nREAD f\nIFEQ 1 7 6\nREJECT\nACCEPT", 1),
    "dec_floor": ("ZERO\nDEC\nSETB 1\nZERO\nIFEQ 1 7 6\nREJECT\nACCEPT", 1),
    "load_untouched": ("SETL\nLOAD\nSETB 1\nZERO\nIFEQ 1 7 6\nREJECT\nACCEPT", 1),
    "two_cycle": ("GUESS\nSETB 2\nSETB 1\nREAD f\nSETB 1\nREAD f\nIFEQ 2 9 8\nREJECT\nACCEPT", 2),
    # Stores n at address n, then guesses until a guess equals n (each
    # miss costs two steps) and reads the address back. Enough misses
    # push the LOAD into a later block.
    "memory_blocks": ("SETL\nSETB 1\nSTORE 1\nGUESS\nIFEQ 1 6 4\nLOAD\nIFEQ 1 9 8\n"
                      "REJECT\nACCEPT", 1),
    "f1_is_0": ("ZERO\nINC\nSETB 1\nREAD f\nSETB 1\nZERO\nIFEQ 1 9 8\nREJECT\nACCEPT", 1),
    "store_roundtrip": ("ZERO\nINC\nSETB 1\nSTORE 1\nLOAD\nIFEQ 1 8 7\nREJECT\nACCEPT", 1),
}


def source(name: str) -> str:
    """Assembly text of a suite program."""
    return _text(*SOURCES[name])


def suite():
    return {name: _prog(src, d) for name, (src, d) in SOURCES.items()}
