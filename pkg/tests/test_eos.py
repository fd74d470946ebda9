import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpcdg.eos import (
    DomainError,
    EosModel,
    default_sample_grid,
    enthalpy,
    enthalpy_partials,
    internal_energy,
    sound_speed_sq,
    validate_eos,
)

IDEAL = EosModel.ideal(5.0 / 3.0)
ALL = [IDEAL, EosModel("mathews"), EosModel("sokolov"), EosModel("ryu")]
logs = st.floats(min_value=-8, max_value=4)


@pytest.mark.parametrize(
    "eos, h",
    [
        (IDEAL, 3.5),
        (EosModel("ryu"), 4.4),
        (EosModel("sokolov"), 2 + math.sqrt(5)),
        (EosModel("mathews"), 2.5 + math.sqrt(3.25)),
    ],
)
def test_enthalpy_unit_state(eos, h):
    assert enthalpy(eos, 1.0, 1.0) == pytest.approx(h, rel=1e-15)


def test_internal_energy_examples():
    assert internal_energy(IDEAL, 1.0, 1.0) == pytest.approx(1.5, rel=1e-15)
    assert internal_energy(EosModel("ryu"), 1.0, 1.0) == pytest.approx(2.4, rel=1e-14)


@pytest.mark.parametrize("eos", ALL, ids=str)
def test_internal_energy_vanishes_with_pressure(eos):
    e = [internal_energy(eos, 10.0**-k, 1.0) for k in (2, 6, 10, 14)]
    assert all(a > b > 0 for a, b in zip(e, e[1:]))
    assert e[-1] < 1e-13


def test_ideal_partials():
    dp, dr = enthalpy_partials(IDEAL, 1.0, 1.0)
    assert dp == pytest.approx(2.5, rel=1e-15)
    assert dr == pytest.approx(-2.5, rel=1e-15)


@pytest.mark.parametrize("eos, p, rho", [(EosModel("ryu"), 1.0, 1.0), (EosModel("sokolov"), 2.0, 3.0), (EosModel("mathews"), 0.3, 7.0)])
def test_partials_match_finite_differences(eos, p, rho):
    dp, dr = enthalpy_partials(eos, p, rho)
    hp = 1e-6 * max(1.0, abs(p))
    hr = 1e-6 * max(1.0, abs(rho))
    fd_p = (enthalpy(eos, p + hp, rho) - enthalpy(eos, p - hp, rho)) / (2 * hp)
    fd_r = (enthalpy(eos, p, rho + hr) - enthalpy(eos, p, rho - hr)) / (2 * hr)
    assert dp == pytest.approx(fd_p, rel=1e-6)
    assert dr == pytest.approx(fd_r, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(lp=logs, lr=logs)
def test_partials_fd_property(lp, lr):
    p, rho = 10.0**lp, 10.0**lr
    for eos in ALL:
        dp, dr = enthalpy_partials(eos, p, rho)
        # h depends on p / rho only, so the step must scale with p
        hp = 1e-6 * p
        fd = (enthalpy(eos, p + hp, rho) - enthalpy(eos, p - hp, rho)) / (2 * hp)
        assert abs(dp - fd) <= 1e-5 * abs(dp) + 1e-9 * enthalpy(eos, p, rho) / hp


def test_ideal_sound_speed_identity():
    rng = np.random.default_rng(1)
    p = 10.0 ** rng.uniform(-8, 4, 1000)
    rho = 10.0 ** rng.uniform(-8, 4, 1000)
    c2 = sound_speed_sq(IDEAL, p, rho)
    ref = (5 / 3) * p / (rho * enthalpy(IDEAL, p, rho))
    np.testing.assert_allclose(c2, ref, rtol=1e-12)
    assert sound_speed_sq(IDEAL, 1.0, 1.0) == pytest.approx((5 / 3) / 3.5, rel=1e-14)


@pytest.mark.parametrize("eos, p, rho", [(EosModel("ryu"), 1e-8, 1.0), (EosModel("mathews"), 1e4, 1.0)])
def test_sound_speed_causal(eos, p, rho):
    assert 0.0 < sound_speed_sq(eos, p, rho) < 1.0


@settings(max_examples=300, deadline=None)
@given(lp=logs, lr=logs)
def test_conditions_hold_pointwise(lp, lr):
    p, rho = 10.0**lp, 10.0**lr
    x = p / rho
    for eos in ALL:
        h = enthalpy(eos, p, rho)
        dp, dr = enthalpy_partials(eos, p, rho)
        assert h - x - math.sqrt(1 + x * x) >= -1e-12 * h
        assert dr < 0
        assert h * (1 / rho - dp) < dr
        assert 0 < sound_speed_sq(eos, p, rho) < 1


@pytest.mark.parametrize("eos", ALL, ids=str)
def test_validate_passes_for_shipped_closures(eos):
    rep = validate_eos(eos)
    assert rep.passed, rep.text()


def test_validate_flags_gamma_three():
    rep = validate_eos(EosModel.ideal(3.0, strict=False))
    assert not rep.passed
    failed = [c.name for c in rep.conditions if not c.passed]
    assert any("sqrt" in n for n in failed)
    assert "FAIL" in rep.text()


def test_domain_errors():
    with pytest.raises(DomainError):
        enthalpy(IDEAL, -1.0, 1.0)
    with pytest.raises(DomainError):
        internal_energy(IDEAL, 1.0, 0.0)
    with pytest.raises(DomainError):
        EosModel.ideal(3.0)
    with pytest.raises(DomainError):
        EosModel("vdw")


def test_parse_round_trip():
    assert EosModel.parse("ideal:1.4") == EosModel.ideal(1.4)
    assert EosModel.parse(" RYU ") == EosModel("ryu")
    assert str(EosModel.parse("ideal:1.4")) == "ideal:1.4"
    assert EosModel.parse("ideal").gamma == pytest.approx(5 / 3)


def test_sample_grid_is_logarithmic():
    p, rho = default_sample_grid()
    assert p.size == 25 * 25
    assert p.min() == pytest.approx(1e-8) and p.max() == pytest.approx(1e4)
