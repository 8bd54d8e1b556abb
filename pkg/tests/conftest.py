import numpy as np
import pytest

from mutable.types import ImuSample

SAMPLE_US = round(1e6 / 104)


def quiet_stream(n=200, az=1.0, t0=0, noise=0.0, seed=0):
    """Flat acceleration stream at the nominal 104 Hz rate."""
    rng = np.random.default_rng(seed)
    return [
        ImuSample(
            t=t0 + k * SAMPLE_US,
            ax=float(rng.normal(0, noise)) if noise else 0.0,
            ay=float(rng.normal(0, noise)) if noise else 0.0,
            az=az + (float(rng.normal(0, noise)) if noise else 0.0),
        )
        for k in range(n)
    ]


def with_dip(stream, index, dip):
    """Copy of the stream with a one-sample drop in az at the given index."""
    out = list(stream)
    s = out[index]
    out[index] = ImuSample(t=s.t, ax=s.ax, ay=s.ay, az=s.az - dip)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
