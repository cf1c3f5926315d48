# This code is part of tollsim.
#
# (C) Copyright the tollsim developers 2024
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

from contextlib import nullcontext
from typing import Any, ContextManager

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tollsim.errors import format_locus
from tollsim.utils import HORIZON, format_time, hour_bin, map_exceptions, parse_time, stable_seed


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        ("00:00:00", nullcontext(0)),
        ("07:00", nullcontext(25200)),
        ("29:59:59", nullcontext(HORIZON - 1)),
        (3600, nullcontext(3600)),
        ("7am", pytest.raises(ValueError)),
        ("08:60", pytest.raises(ValueError)),
        (True, pytest.raises(ValueError)),
        (float("nan"), pytest.raises(ValueError)),
    ],
)
def test_parse_time(value: Any, expected: ContextManager[Any]) -> None:
    """Check the accepted time-of-day notations."""
    with expected as seconds:
        assert parse_time(value) == seconds


@given(st.integers(min_value=0, max_value=HORIZON))
def test_time_text_roundtrip(seconds: int) -> None:
    """Check that formatted times parse back to the same number of seconds."""
    assert parse_time(format_time(seconds)) == seconds


@given(st.integers(min_value=0, max_value=10 * HORIZON))
def test_hour_bin_range(seconds: int) -> None:
    """Check that hour bins never exceed the horizon."""
    assert 0 <= hour_bin(seconds) < HORIZON // 3600
    assert hour_bin(seconds) == min(seconds // 3600, 29)


def test_map_exceptions_keeps_others() -> None:
    """Check that exceptions outside of the source set are not mapped."""

    @map_exceptions(ValueError, source_exc=(KeyError,))
    def func() -> None:
        raise IndexError("untouched")

    with pytest.raises(IndexError, match="untouched"):
        func()


def test_map_exceptions_chains_cause() -> None:
    """Check that the mapped exception carries the original one as cause."""

    @map_exceptions(RuntimeError, source_exc=(OSError,))
    def func() -> None:
        raise FileNotFoundError("gone")

    with pytest.raises(RuntimeError, match="gone") as excinfo:
        func()

    assert isinstance(excinfo.value.__cause__, FileNotFoundError)


def test_stable_seed_is_order_sensitive() -> None:
    """Check that the entropy tuple depends on the order of its parts."""
    assert stable_seed(1, "a", 2) != stable_seed(2, "a", 1)
    assert all(isinstance(part, int) for part in stable_seed("x", 3))


def test_format_locus_root() -> None:
    """Check that root-level list indices render without a leading field name."""
    assert format_locus(("__root__", 2, "id")) == "[2].id"
    assert format_locus(()) == ""
