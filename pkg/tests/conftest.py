import os
import sys
from types import SimpleNamespace

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("qrs", max_examples=40, deadline=None)
settings.load_profile("qrs")


def oracle_point(inputs) -> dict:
    """Flatten sampled inputs into the plain dict the hand-coded oracles read."""
    p = inputs.point
    out = {"q": p.q, **p.scalars}
    for k, v in p.vectors.items():
        out[k] = list(v)
    return out


def lattice(extern):
    """Adapt a sampled free function to take a plain multi-index."""
    return lambda M: extern(SimpleNamespace(exps=tuple(M)))


ACCEPTANCE: list = []


def record_criterion(tag: str, ok: bool, detail: str) -> str:
    line = f"{tag:<4} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[0][1:])):
            terminalreporter.write_line(line)
