"""Shared machine corpus and generators for the test suite.

Halting machines carry their exact halt step, verified by hand
simulation of the interpreter semantics (every executed instruction,
halt included, counts as one step). Non-halting machines are structural:
control provably never reaches a halt or falls off the end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from haltseries import DecJz, Halt, Inc, MachineProgram, parse_program


@dataclass(frozen=True)
class HaltingCase:
    name: str
    source: str
    input_value: int
    halt_step: int  # hand-simulated


@dataclass(frozen=True)
class NonHaltingCase:
    name: str
    source: str
    input_value: int


HALTING = (
    # halt executes as the single step
    HaltingCase("halt_now", "halt", 0, 1),
    # inc, inc, halt
    HaltingCase("two_incs", "inc 0\ninc 0\nhalt", 0, 3),
    # decjz on zero jumps (step 1), halt (step 2)
    HaltingCase("jump_to_halt", "decjz 0 end\nend: halt", 0, 2),
    # per loop pass: decjz hit + jump back = 2 steps; 3 passes for input 3,
    # then the zero test jumps out (1) and halt (1): 2*3 + 2 = 8
    HaltingCase(
        "countdown",
        "loop: decjz 0 done\ndecjz 2 loop\ndone: halt",
        3,
        8,
    ),
    # 3 incs, then 3 passes of (decjz, inc, jump) = 9, exit test 1, halt 1
    HaltingCase(
        "drain_three",
        "inc 1\ninc 1\ninc 1\ndrain: decjz 1 done\ninc 0\ndecjz 2 drain\ndone: halt",
        0,
        14,
    ),
    # single inc, halts by falling off the end
    HaltingCase("fall_off", "inc 0", 0, 1),
)

NON_HALTING = (
    NonHaltingCase("self_loop", "loop: decjz 1 loop", 0),
    NonHaltingCase("inc_forever", "loop: inc 1\ndecjz 2 loop", 0),
    NonHaltingCase("two_inc_loop", "loop: inc 0\ninc 0\ndecjz 3 loop", 0),
    NonHaltingCase("ping_pong", "a: decjz 2 b\nb: decjz 3 a", 0),
    NonHaltingCase("grow", "grow: inc 1\ninc 2\ndecjz 4 grow", 0),
    # register 0 is bumped right before the test, so it never reads zero
    # and the halt line is unreachable
    NonHaltingCase("bump_then_test", "top: inc 0\ndecjz 0 out\ndecjz 5 top\nout: halt", 7),
)


def halting_programs() -> list[tuple[HaltingCase, MachineProgram]]:
    return [(case, parse_program(case.source)) for case in HALTING]


def non_halting_programs() -> list[tuple[NonHaltingCase, MachineProgram]]:
    return [(case, parse_program(case.source)) for case in NON_HALTING]


def all_programs() -> list[MachineProgram]:
    return [parse_program(c.source) for c in HALTING + NON_HALTING]


def random_program(rng: random.Random, max_len: int = 8, max_regs: int = 4) -> MachineProgram:
    """A uniformly scrappy but always-valid random program."""
    n = rng.randint(1, max_len)
    register_count = rng.randint(1, max_regs)
    instructions = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.4:
            instructions.append(Inc(rng.randrange(register_count)))
        elif roll < 0.8:
            instructions.append(DecJz(rng.randrange(register_count), rng.randrange(n)))
        else:
            instructions.append(Halt())
    return MachineProgram(tuple(instructions), register_count)


def cantor_pair(a: int, b: int) -> int:
    """Independent pairing helper for building codes by hand in tests."""
    s = a + b
    return s * (s + 1) // 2 + a
