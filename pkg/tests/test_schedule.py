"""Decay-schedule construction and certification."""

from fractions import Fraction as F

import pytest

from schreier.errors import InputError, TailDescriptorMissing
from schreier.schedule import (EpsilonSchedule, TailDescriptor, build_schedule,
                               validate_schedule)


def _geometric_schedule(length=6, a=F(1, 64), q=F(1, 4)):
    tail = TailDescriptor("geometric", a=a, q=q)
    eps = tuple(tail.eps_at(i) for i in range(-1, length + 1))
    tilde = []
    for p in range(0, length + 1):
        cand = tail.eps_at(p + 2) / (8 * (p + 1))
        tilde.append(cand if p == 0 else min(cand, tilde[-1] / 4))
    return EpsilonSchedule(eps, tuple(tilde), tail)


def test_built_schedules_validate():
    for length in (1, 2, 5, 8, 32):
        rep = validate_schedule(build_schedule(length))
        assert rep.passed
        assert all(ch.margin is None or ch.margin > 0 for ch in rep.checks)


def test_build_shape():
    s = build_schedule(1)
    assert len(s.eps) == 3          # indices -1, 0, 1
    assert len(s.eps_tilde) == 2    # indices 0, 1
    assert s.eps[0] > s.eps[1] > s.eps[2] > 0
    with pytest.raises(InputError):
        build_schedule(0)


def test_prefix_sum_below_quarter():
    for length in (1, 4, 12):
        s = build_schedule(length)
        assert sum(s.eps, F(0)) < F(1, 4)


def test_eps_at_extends_via_descriptor():
    s = build_schedule(3)
    # closed form continues the prefix exactly
    assert s.eps_at(3) == s.eps[4]
    assert s.eps_at(4) == s.tail.eps_at(4)
    assert s.eps_at(4) < s.eps_at(3)


def test_geometric_family_fails_second_clause_at_zero():
    rep = validate_schedule(_geometric_schedule())
    assert not rep.passed
    binding = rep.binding
    assert binding is not None
    assert binding.clause == "(1.1) second part"
    assert binding.p == 0
    assert binding.lhs == F(40, 576)
    assert binding.rhs == F(1, 16)
    assert binding.margin == F(1, 16) - F(40, 576)
    assert binding.margin < 0


def test_non_monotone_entry_fails_monotone_clause():
    s = build_schedule(4)
    eps = list(s.eps)
    eps[2], eps[3] = eps[3], eps[2]
    rep = validate_schedule(EpsilonSchedule(tuple(eps), s.eps_tilde, s.tail))
    assert not rep.passed
    assert any(ch.clause == "monotone decreasing" and ch.ok is False
               for ch in rep.checks)


def test_missing_tail_descriptor_raises_only_when_needed():
    s = build_schedule(3)
    bare = EpsilonSchedule(s.eps, s.eps_tilde, TailDescriptor("none"))
    with pytest.raises(TailDescriptorMissing):
        validate_schedule(bare)
    # a prefix-detectable failure is reported without raising
    eps = list(s.eps)
    eps[0] = F(-1)
    rep = validate_schedule(EpsilonSchedule(tuple(eps), s.eps_tilde,
                                            TailDescriptor("none")))
    assert not rep.passed


def test_tampered_companion_entry_fails_growth_clause():
    s = build_schedule(5)
    tilde = list(s.eps_tilde)
    tilde[2] = s.eps_at(4)  # far too large: 8 * tilde_2 >= eps_4
    rep = validate_schedule(EpsilonSchedule(s.eps, tuple(tilde), s.tail))
    assert not rep.passed
    assert any(ch.clause == "(1.2) first part" and ch.p == 2 and ch.ok is False
               for ch in rep.checks)


def test_descriptor_validation():
    with pytest.raises(InputError):
        TailDescriptor("geometric", a=F(1), q=F(3, 2))
    with pytest.raises(InputError):
        TailDescriptor("factorial", c=F(-1), r=F(1, 2))
    with pytest.raises(InputError):
        TailDescriptor("mystery")
