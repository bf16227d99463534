from __future__ import annotations

import numpy as np
import pytest

from strokelab.ingest import Dataset, prepare
from strokelab.synthetic import write_stroke_like


@pytest.fixture(scope="session")
def stroke_csv(tmp_path_factory):
    """Full-size synthetic table with the stroke schema."""
    path = tmp_path_factory.mktemp("data") / "stroke_like.csv"
    write_stroke_like(path, n=5110, seed=0)
    return path


@pytest.fixture(scope="session")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "stroke_small.csv"
    write_stroke_like(path, n=900, seed=3)
    return path


@pytest.fixture(scope="session")
def onehot_ds(stroke_csv) -> Dataset:
    return prepare(stroke_csv, "regression", "onehot")


@pytest.fixture(scope="session")
def label_ds(stroke_csv) -> Dataset:
    return prepare(stroke_csv, "regression", "label")


def toy_dataset(n=200, d=4, pos=0.2, seed=0, shift=1.5) -> Dataset:
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < pos).astype(np.int64)
    y[:2] = [0, 1]
    X = rng.normal(size=(n, d)) + shift * y[:, None]
    return Dataset(X, y, tuple(f"f{i}" for i in range(d)))


@pytest.fixture
def toy():
    return toy_dataset()


# ------------------------------------------------------- acceptance summary

ACCEPTANCE_NOTES: dict[int, list[str]] = {}
_ACCEPTANCE_OUTCOMES: dict[int, list[bool]] = {}


def note(criterion: int, text: str) -> None:
    ACCEPTANCE_NOTES.setdefault(criterion, []).append(text)


def _criterion_of(nodeid: str):
    if "test_acceptance.py::test_c" not in nodeid:
        return None
    name = nodeid.split("::test_c", 1)[1]
    return int(name[:2])


def pytest_runtest_logreport(report):
    cid = _criterion_of(report.nodeid)
    if cid is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _ACCEPTANCE_OUTCOMES.setdefault(cid, []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE_OUTCOMES):
        ok = all(_ACCEPTANCE_OUTCOMES[cid])
        detail = "; ".join(ACCEPTANCE_NOTES.get(cid, []))
        terminalreporter.write_line(f"criterion {cid:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
