"""Small hand-written machines used by tests, fixtures and scenarios.

Binary functions read ``1^x 0 1^n`` and halt with the unary answer on tape 0
starting at cell 0 and the tape-0 head back on cell 0 (the normal form the
curried machines rely on).  Oracle functionals read ``1^l`` and leave a
single output bit.
"""
from __future__ import annotations

from .machine import MultiTapeTM, OracleSpec

__all__ = [
    "projection",
    "addition",
    "palindrome",
    "echo",
    "loop",
    "const_functional",
    "bit_functional",
    "diverge_functional",
    "functional",
    "FUNCTIONALS",
    "BINARY",
    "accept_all",
    "reject_all",
    "even_length",
    "DECIDERS",
]


def projection() -> MultiTapeTM:
    """``g(x, n) = x``: run to the right end, erase back to the separator, rewind."""
    t = [
        ("a", "1", "a", "*", "R"),
        ("a", "0", "b", "*", "R"),
        ("b", "1", "b", "*", "R"),
        ("b", "_", "e", "*", "L"),
        ("e", "1", "e", "_", "L"),
        ("e", "0", "w", "_", "L"),
        ("w", "1", "w", "*", "L"),
        ("w", "_", "h", "*", "R"),
    ]
    return MultiTapeTM(1, ("a", "b", "e", "w", "h"), "a", {"h"}, t, name="projection")


def addition() -> MultiTapeTM:
    """``g(x, n) = x + n``: fill the separator, drop the last 1, rewind."""
    t = [
        ("a", "1", "a", "*", "R"),
        ("a", "0", "b", "1", "R"),
        ("b", "1", "b", "*", "R"),
        ("b", "_", "e", "*", "L"),
        ("e", "1", "w", "_", "L"),
        ("w", "1", "w", "*", "L"),
        ("w", "_", "h", "*", "R"),
    ]
    return MultiTapeTM(1, ("a", "b", "e", "w", "h"), "a", {"h"}, t, name="addition")


def palindrome() -> MultiTapeTM:
    """Two tapes; outputs ``1`` on palindromes and ``0`` otherwise."""
    t = [
        # copy the input onto tape 1
        ("copy", "0*", "copy", "*0", "RR"),
        ("copy", "1*", "copy", "*1", "RR"),
        ("copy", "__", "rew", "**", "LL"),
        # rewind tape 0 only
        ("rew", "0*", "rew", "**", "LS"),
        ("rew", "1*", "rew", "**", "LS"),
        ("rew", "_*", "cmp", "**", "RS"),
        # tape 0 forwards against tape 1 backwards
        ("cmp", "00", "cmp", "**", "RL"),
        ("cmp", "11", "cmp", "**", "RL"),
        ("cmp", "01", "rej", "**", "SS"),
        ("cmp", "10", "rej", "**", "SS"),
        ("cmp", "_*", "eraseY", "**", "LS"),
        # reject: go to the right end first
        ("rej", "0*", "rej", "**", "RS"),
        ("rej", "1*", "rej", "**", "RS"),
        ("rej", "_*", "eraseN", "**", "LS"),
        ("eraseY", "0*", "eraseY", "_*", "LS"),
        ("eraseY", "1*", "eraseY", "_*", "LS"),
        ("eraseY", "_*", "putY", "**", "RS"),
        ("eraseN", "0*", "eraseN", "_*", "LS"),
        ("eraseN", "1*", "eraseN", "_*", "LS"),
        ("eraseN", "_*", "putN", "**", "RS"),
        ("putY", "**", "h", "1*", "SS"),
        ("putN", "**", "h", "0*", "SS"),
    ]
    states = ("copy", "rew", "cmp", "rej", "eraseY", "eraseN", "putY", "putN", "h")
    return MultiTapeTM(2, states, "copy", {"h"}, t, name="palindrome")


def echo() -> MultiTapeTM:
    return MultiTapeTM(1, ("h",), "h", {"h"}, (), name="echo")


def loop() -> MultiTapeTM:
    return MultiTapeTM(1, ("q",), "q", (), [("q", "*", "q", "*", "S")], name="loop")


def _erase_then(states_prefix: str, final: str):
    """Transitions that erase ``1^m`` on tape 0 (head at cell 0) and stop on cell 0.

    Work tape 1 is left alone.  ``final`` is the state entered on cell 0.
    """
    go, er = states_prefix + "go", states_prefix + "er"
    return [go, er], [
        (go, "1*", go, "**", "RS"),
        (go, "_*", er, "**", "LS"),
        (er, "1*", er, "_*", "LS"),
        (er, "_*", final, "**", "RS"),
    ]


def const_functional(bit: int) -> MultiTapeTM:
    """Ignores the oracle; outputs ``bit``."""
    names, t = _erase_then("", "put")
    t.append(("put", "**", "h", ("1" if bit else "_") + "*", "SS"))
    return MultiTapeTM(2, (*names, "put", "h"), names[0], {"h"}, t, name=f"const{bit}")


def bit_functional(offset: int = 0, negate: bool = False) -> MultiTapeTM:
    """On ``1^l`` query the oracle at ``l + offset``; output that bit (or its negation)."""
    states = ["cp"] + [f"o{i}" for i in range(offset)] + ["q", "y", "n"]
    t = [("cp", "1*", "cp", "*1", "RR")]
    nxt = "o0" if offset else "q"
    t.append(("cp", "_*", nxt, "**", "SS"))
    for i in range(offset):
        t.append((f"o{i}", "**", f"o{i + 1}" if i + 1 < offset else "q", "*1", "SR"))
    # tape 0 head sits just past the input: step back, erase leftwards, land on cell 0
    yes_bit, no_bit = ("0", "1") if negate else ("1", "0")
    for tag, b in (("y", yes_bit), ("n", no_bit)):
        states += [f"{tag}e", f"{tag}p"]
        t += [
            (tag, "**", f"{tag}e", "**", "LS"),
            (f"{tag}e", "1*", f"{tag}e", "_*", "LS"),
            (f"{tag}e", "_*", f"{tag}p", "**", "RS"),
            (f"{tag}p", "**", "h", b + "*", "SS"),
        ]
    states.append("h")
    name = f"{'neg' if negate else ''}bit{offset}"
    return MultiTapeTM(2, states, "cp", {"h"}, t, oracle=OracleSpec("q", "y", "n", 1), name=name)


def diverge_functional() -> MultiTapeTM:
    m = loop()
    return MultiTapeTM(2, m.states, m.start, m.halting, [("q", "**", "q", "**", "SS")], name="diverge")


FUNCTIONALS = {
    "const0": lambda: const_functional(0),
    "const1": lambda: const_functional(1),
    "bit": lambda offset=0: bit_functional(int(offset)),
    "negbit": lambda offset=0: bit_functional(int(offset), negate=True),
    "diverge": diverge_functional,
}

BINARY = {
    "projection": projection,
    "addition": addition,
}


def functional(name: str, *args) -> MultiTapeTM:
    try:
        make = FUNCTIONALS[name]
    except KeyError:
        raise KeyError(f"unknown functional {name!r}; known: {sorted(FUNCTIONALS)}") from None
    return make(*args)


def _word_to_bit(name: str, states: list, t: list, start: str) -> MultiTapeTM:
    return MultiTapeTM(1, tuple(states), start, {"h"}, t, name=name)


def accept_all() -> MultiTapeTM:
    """Erases its input and outputs ``1``."""
    t = [
        ("go", "0", "go", "*", "R"), ("go", "1", "go", "*", "R"), ("go", "_", "er", "*", "L"),
        ("er", "0", "er", "_", "L"), ("er", "1", "er", "_", "L"), ("er", "_", "put", "*", "R"),
        ("put", "*", "h", "1", "S"),
    ]
    return _word_to_bit("accept_all", ["go", "er", "put", "h"], t, "go")


def reject_all() -> MultiTapeTM:
    """Blanks cell 0 and halts: output 0."""
    return _word_to_bit("reject_all", ["z", "h"], [("z", "*", "h", "_", "S")], "z")


def even_length() -> MultiTapeTM:
    """Outputs ``1`` iff the input length is even."""
    t = [
        ("ev", "0", "od", "*", "R"), ("ev", "1", "od", "*", "R"), ("ev", "_", "erY", "*", "L"),
        ("od", "0", "ev", "*", "R"), ("od", "1", "ev", "*", "R"), ("od", "_", "erN", "*", "L"),
        ("erY", "0", "erY", "_", "L"), ("erY", "1", "erY", "_", "L"), ("erY", "_", "pY", "*", "R"),
        ("erN", "0", "erN", "_", "L"), ("erN", "1", "erN", "_", "L"), ("erN", "_", "h", "*", "R"),
        ("pY", "*", "h", "1", "S"),
    ]
    return _word_to_bit("even_length", ["ev", "od", "erY", "erN", "pY", "h"], t, "ev")


DECIDERS = {
    "accept_all": accept_all,
    "reject_all": reject_all,
    "even_length": even_length,
}
