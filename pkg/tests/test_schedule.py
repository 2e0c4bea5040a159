import math

import pytest

from subgradpush.schedule import StepSchedule


def test_inv_sqrt():
    s = StepSchedule()
    assert s(1) == 1.0
    assert s(4) == 0.5
    assert s.is_inv_sqrt
    # sum diverges, squares do not sum: 1/sqrt(t) only satisfies the first condition
    assert s.decay_conditions() == (True, False, True)


def test_undefined_at_zero():
    with pytest.raises(ValueError):
        StepSchedule()(0)


def test_inv_t_power():
    s = StepSchedule("inv-t-power", p=1.0)
    assert s(4) == 0.25
    assert s.decay_conditions() == (True, True, True)
    with pytest.raises(ValueError):
        StepSchedule("inv-t-power", p=0.4)


def test_offset_not_inv_sqrt():
    assert not StepSchedule(offset=1.0).is_inv_sqrt


def test_custom_values():
    s = StepSchedule("custom-summable-square", values=(1.0, 0.5, 0.25))
    assert [s(t) for t in (1, 2, 3)] == [1.0, 0.5, 0.25]
    with pytest.raises(ValueError):
        s(4)
    with pytest.raises(ValueError):
        StepSchedule("custom-summable-square", values=(0.5, 1.0))


def test_partial_sum():
    s = StepSchedule()
    assert s.partial_sum(3) == math.fsum([1.0, 1 / math.sqrt(2), 1 / math.sqrt(3)])
    assert s.partial_sum(0) == 0.0
