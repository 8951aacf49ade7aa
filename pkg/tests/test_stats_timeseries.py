import math

import numpy as np
import pandas as pd
import pytest

from emikit.errors import DataError
from emikit.stats.timeseries import TimeSeriesTable, load_table


def basic_frame():
    return pd.DataFrame(
        {
            "session": [100, 98, 99, 101],
            "EMI": [1.0, 2.0, 3.0, 4.0],
            "Pol": [0.5, 0.6, 0.7, 0.8],
        }
    )


def test_load_sorts_by_session():
    table = load_table(basic_frame())
    assert list(table.sessions) == [98, 99, 100, 101]
    assert table.column("EMI").loc[98] == 2.0
    assert table.column("EMI").loc[100] == 1.0
    assert table.column("EMI").loc[101] == 4.0


def test_gap_becomes_missing_row():
    frame = pd.DataFrame({"session": [1, 2, 4], "x": [1.0, 2.0, 4.0]})
    table = load_table(frame)
    assert list(table.sessions) == [1, 2, 3, 4]
    assert math.isnan(table.column("x").loc[3])
    # positional and index shift coincide: the gap poisons the next lag
    lag = table.lagged("x", 1)
    assert math.isnan(lag.loc[4])
    assert lag.loc[2] == 1.0


def test_duplicate_sessions_rejected():
    frame = pd.DataFrame({"session": [1, 1, 2], "x": [1.0, 2.0, 3.0]})
    with pytest.raises(DataError) as exc:
        load_table(frame)
    assert "1" in str(exc.value)


def test_log_transform():
    frame = pd.DataFrame({"session": [1, 2, 3], "n": [math.e, math.e ** 2, math.e ** 3]})
    table = load_table(frame, log_columns=("n",))
    assert table.column("n").tolist() == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)
    assert table.transforms["n"] == "log"


def test_log_rejects_nonpositive():
    frame = pd.DataFrame({"session": [1, 2], "n": [1.0, 0.0]})
    with pytest.raises(DataError):
        load_table(frame, log_columns=("n",))


def test_log_column_must_exist():
    with pytest.raises(DataError):
        load_table(basic_frame(), log_columns=("missing",))


def test_standardize_population_sd():
    frame = pd.DataFrame({"session": [1, 2, 3, 4], "x": [1.0, 2.0, 3.0, 4.0]})
    table = load_table(frame, standardize=True)
    vals = table.column("x").to_numpy()
    assert vals.mean() == pytest.approx(0.0, abs=1e-12)
    # population sd of 1..4 is sqrt(1.25)
    assert vals[3] == pytest.approx(1.5 / math.sqrt(1.25), abs=1e-12)
    assert table.transforms["x"] == "zscore"


def test_lagged_semantics():
    table = load_table(pd.DataFrame({"session": [1, 2, 3], "x": [10.0, 20.0, 30.0]}))
    lag = table.lagged("x", 1)
    assert math.isnan(lag.loc[1])
    assert lag.loc[2] == 10.0 and lag.loc[3] == 20.0
    assert table.lagged("x", 0).loc[3] == 30.0
    with pytest.raises(DataError):
        table.lagged("x", -1)
    with pytest.raises(DataError):
        table.lagged("nope", 1)


def test_restricted_window():
    table = load_table(pd.DataFrame({"session": range(1, 11), "x": np.arange(10.0)}))
    view = table.restricted(min_session=4, max_session=7)
    assert list(view.sessions) == [4, 5, 6, 7]
    assert view.transforms == table.transforms


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "table.csv"
    basic_frame().to_csv(path, index=False)
    table = load_table(path)
    assert list(table.sessions) == [98, 99, 100, 101]
    assert "EMI" in table and "Pol" in table and "zzz" not in table


def test_index_name_enforced():
    frame = basic_frame().set_index("session")
    frame.index.name = "period"
    with pytest.raises(DataError):
        TimeSeriesTable(frame=frame)


def test_missing_session_column():
    with pytest.raises(DataError):
        load_table(pd.DataFrame({"year": [1, 2], "x": [1.0, 2.0]}))
