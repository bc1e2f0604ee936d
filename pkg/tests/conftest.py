from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from bitorder.core import EmbeddingMatrix, Vocabulary

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# six attributes; rows from the worked flying/vehicle/shoe example
TABLE5 = {
    "flying": "100000",
    "vehicle": "001000",
    "airplane": "111000",
    "helicopter": "101100",
    "shoe": "000010",
    "mens-shoe": "000110",
    "womens-shoe": "000011",
}

# a known perfect 8-bit embedding of the toy lattice
TOY_EMBEDDING = {
    "animal": "00110101",
    "boy": "11110001",
    "cat": "01110101",
    "city": "00100010",
    "dog": "00111101",
    "female": "10010100",
    "girl": "11011100",
    "livingThing": "00010000",
    "male": "11010001",
    "man": "11010011",
    "NewYork": "01100111",
    "object": "00000000",
    "person": "10010000",
    "SanJuan": "10101110",
    "woman": "11010110",
}


def matrix_from_rows(rows: dict[str, str], order=None):
    names = list(order or rows)
    bits = [[int(c) for c in rows[s]] for s in names]
    return EmbeddingMatrix.from_bits(np.array(bits)), Vocabulary(names)


@pytest.fixture
def table5():
    return matrix_from_rows(TABLE5)


@pytest.fixture
def toy_path():
    return DATA / "toy_lattice.tsv"


@pytest.fixture
def animals_path():
    return DATA / "animals.tsv"


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
