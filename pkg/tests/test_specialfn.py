"""The local gamma/beta pair against the stdlib and frozen references."""

import math

import numpy as np
import pytest

from fracasym.specialfn import beta, gamma

# mpmath, 50 digits
GAMMA_TABLE = {
    0.25: 3.6256099082219083119,
    0.5: 1.7724538509055160273,
    0.7: 1.2980553326475577857,
    1.25: 0.90640247705547707798,
    1.5: 0.88622692545275801365,
    1.75: 0.91906252684888323385,
}


def test_frozen_gamma_values():
    for x, want in GAMMA_TABLE.items():
        assert gamma(x) == pytest.approx(want, rel=1e-14)


def test_gamma_tracks_stdlib_over_the_working_range():
    rng = np.random.default_rng(20260816)
    for x in rng.uniform(0.05, 4.0, size=300):
        x = float(x)
        assert gamma(x) == pytest.approx(math.gamma(x), rel=5e-14)


def test_gamma_recurrence():
    rng = np.random.default_rng(7)
    for x in rng.uniform(0.05, 2.0, size=60):
        x = float(x)
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=2e-13)


def test_gamma_at_integers():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma(2.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma(4.0) == pytest.approx(6.0, rel=1e-14)


def test_gamma_rejects_nonpositive_arguments():
    for bad in (0.0, -0.5, -3.0):
        with pytest.raises(ValueError):
            gamma(bad)


def test_beta_half_half_is_pi():
    assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-13)


def test_frozen_beta_value():
    # mpmath, 50 digits
    assert beta(0.3, 0.7) == pytest.approx(3.8832220774509331547, rel=1e-13)


def test_beta_is_symmetric():
    rng = np.random.default_rng(11)
    for q, r in rng.uniform(0.1, 3.0, size=(40, 2)):
        assert beta(float(q), float(r)) == pytest.approx(
            beta(float(r), float(q)), rel=1e-13
        )


def test_beta_rejects_nonpositive_arguments():
    with pytest.raises(ValueError):
        beta(0.0, 1.0)
    with pytest.raises(ValueError):
        beta(1.0, -2.0)
