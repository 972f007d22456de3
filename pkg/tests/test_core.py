import logging
import math

import pytest

from timerefine.core import (
    InvalidSampleError,
    NoiseSchedule,
    RefinementSequence,
    RefinementStep,
    TimeSegment,
    VideoMeta,
    GroundingSample,
    make_sample,
    quantize,
    validate_sample,
)


def test_valid_sample_passes_unchanged():
    s = make_sample("vid", 30, "q", 10, 20)
    assert validate_sample(s) is s


def test_inverted_segment_rejected():
    with pytest.raises(InvalidSampleError, match="start>end") as info:
        validate_sample(make_sample("vid", 30, "q", 20, 10))
    assert info.value.invariant == "start>end"


def test_target_past_duration_rejected():
    with pytest.raises(InvalidSampleError, match="target exceeds duration"):
        validate_sample(make_sample("vid", 15, "q", 10, 20))


@pytest.mark.parametrize("start,end", [(-1, 5), (0, -2)])
def test_negative_times_rejected(start, end):
    with pytest.raises(InvalidSampleError, match="negative"):
        TimeSegment(start, end)


@pytest.mark.parametrize("dur", [0, -3])
def test_non_positive_duration_rejected(dur):
    with pytest.raises(InvalidSampleError, match="non-positive duration"):
        VideoMeta("v", dur)


def test_non_finite_rejected():
    with pytest.raises(InvalidSampleError, match="non-finite"):
        TimeSegment(0, math.inf)
    with pytest.raises(InvalidSampleError, match="non-finite"):
        RefinementStep(TimeSegment(0, 1), math.nan, 0.0)


def test_zero_length_target_warns_but_passes(caplog):
    s = GroundingSample(VideoMeta("v", 10), "q", TimeSegment(4, 4))
    with caplog.at_level(logging.WARNING):
        assert validate_sample(s) is s
    assert "zero-length" in caplog.text


def test_validation_is_pure():
    s = make_sample("vid", 15, "q", 10, 20)
    outcomes = []
    for _ in range(3):
        try:
            validate_sample(s)
            outcomes.append("ok")
        except InvalidSampleError as exc:
            outcomes.append(exc.invariant)
    assert outcomes == ["target exceeds duration"] * 3


def test_schedule_must_be_non_increasing():
    NoiseSchedule((5, 3, 1, 0))
    with pytest.raises(InvalidSampleError, match="non-increasing"):
        NoiseSchedule((1, 3))
    with pytest.raises(InvalidSampleError, match="negative sigma"):
        NoiseSchedule((1, -1))
    with pytest.raises(InvalidSampleError):
        NoiseSchedule((1,), mode="bogus")


def test_fraction_schedule_scales_with_duration():
    sch = NoiseSchedule((0.2, 0.1, 0.05, 0), mode="fraction_of_duration")
    assert sch.seconds(100) == pytest.approx((20, 10, 5, 0))
    assert NoiseSchedule().seconds(100) == (5, 3, 1, 0)


def test_empty_sequence_rejected():
    with pytest.raises(InvalidSampleError):
        RefinementSequence(())


def test_quantize_normalises_negative_zero():
    assert str(quantize(-0.04)) == "0.0"
    assert quantize(27.46) == 27.5
