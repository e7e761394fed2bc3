"""Regenerate the shipped example programs in src/qcutstack/data.

Run from the repository root: python tools/freeze_data.py
"""
import os
from fractions import Fraction

from qcutstack.cutstack import CutStackProgram, IETSpec, TwoComponentMap, full_shift_program, iet_program

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "qcutstack", "data")


def main():
    golden = Fraction(610, 987)
    programs = {
        "golden_rotation": iet_program(IETSpec((2, 1), (1 - golden, golden))),
        "iet3": iet_program(IETSpec((3, 2, 1), (Fraction(300, 1597), Fraction(500, 1597), Fraction(797, 1597)))),
        "two_component": TwoComponentMap(golden, Fraction(408, 985)).program(),
        "full_shift": full_shift_program(12),
    }
    for name, prog in programs.items():
        prog = CutStackProgram(prog.initial, prog.stages, name)
        with open(os.path.join(OUT, f"{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(prog.to_json())
        print(name, prog.n_stages)


if __name__ == "__main__":
    main()
