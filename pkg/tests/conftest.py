import numpy as np
import pytest

from timelens import TimeSeries


@pytest.fixture
def example_series() -> TimeSeries:
    """The two-channel linear ramp used as the worked example throughout."""
    return TimeSeries(np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0], [4.0, 40.0]]))


EXAMPLE_Z = np.array(
    [
        [1.0, 10.0, 2.0, 20.0],
        [2.0, 20.0, 3.0, 30.0],
        [3.0, 30.0, 4.0, 40.0],
    ]
)

EXAMPLE_H = np.array(
    [
        [1.0, 2.0, 3.0],
        [10.0, 20.0, 30.0],
        [2.0, 3.0, 4.0],
        [20.0, 30.0, 40.0],
    ]
)
