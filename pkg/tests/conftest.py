import json
import math
from pathlib import Path

import numpy as np
import pytest

from bbdfs.dfs import encode_register, codes_for
from bbdfs.model import BathSpec, RegisterLayout, Scenario, chain_couplings, random_bath_fields

PINNED = json.loads((Path(__file__).parent / "oracles" / "pinned.json").read_text())
J_REF = (0.3, 0.2, 0.5)
MEMORY_G = (0.02, 0.02, 0.2)
S2 = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def pinned():
    return PINNED


def reference_register(blocks=3, seed=7):
    """Generic scenario: g=0.1 on every axis, one bath spin per block."""
    lay = RegisterLayout.periodic(blocks)
    bath = BathSpec(1, (0.1,) * 3, bath_fields=random_bath_fields(blocks, 0.1, seed))
    return Scenario(lay, chain_couplings(lay, J_REF), bath)


def memory_scenario(bare=False):
    """Dephasing-dominant single block (or bare qubit) with one bath spin."""
    lay = RegisterLayout.bare_qubit() if bare else RegisterLayout.periodic(1)
    bath = BathSpec(1, MEMORY_G, bath_fields=random_bath_fields(1, 0.1, 7))
    return Scenario(lay, chain_couplings(lay, (0.0, 0.0, 0.0)), bath)


def plus_state(sc):
    if sc.layout.bare:
        return np.array([S2, S2], dtype=complex)
    return encode_register(codes_for(sc), [(S2, S2)], sc.n_system)


@pytest.fixture
def register3():
    return reference_register(3)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the verdict of one acceptance criterion for the terminal summary."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE[number] = (bool(ok), detail)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
