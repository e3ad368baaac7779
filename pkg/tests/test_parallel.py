import pytest

from ifsmap.errors import (
    DivergentSeriesError,
    MaxIterationsError,
    NumericalError,
    OddGridSizeError,
    UnderresolvedCapError,
    ValidationError,
)
from ifsmap.parallel import parallel_map, worker_count


@pytest.mark.parametrize("workers", [1, 4])
def test_parallel_map_preserves_order(workers):
    assert parallel_map(lambda x: x * x, range(20), workers) == [x * x for x in range(20)]


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("IFSMAP_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.delenv("IFSMAP_WORKERS")
    assert worker_count() == 1


def test_error_hierarchy():
    assert issubclass(OddGridSizeError, ValidationError) and issubclass(ValidationError, ValueError)
    assert issubclass(UnderresolvedCapError, ValidationError)
    assert issubclass(DivergentSeriesError, NumericalError) and issubclass(MaxIterationsError, NumericalError)
