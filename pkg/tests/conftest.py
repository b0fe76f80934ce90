import pytest

from helpers import ARITHMETIC_TRACE_LINES, SIR_PROBLEM_TRACE_LINES, write_jsonl


@pytest.fixture
def arithmetic_trace_path(tmp_path):
    return write_jsonl(tmp_path / "arithmetic.jsonl", ARITHMETIC_TRACE_LINES)


@pytest.fixture
def sir_problem_trace_path(tmp_path):
    return write_jsonl(tmp_path / "sir_problem.jsonl", SIR_PROBLEM_TRACE_LINES)
