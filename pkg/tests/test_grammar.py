import numpy as np
from hypothesis import given, settings, strategies as st

from timerefine.core import RefinementSequence, RefinementStep, TimeSegment
from timerefine.grammar import embed_in_answer, parse, serialize

from conftest import random_sequence


def one_step(s, e, os_, oe):
    return RefinementSequence((RefinementStep(TimeSegment(s, e), os_, oe),))


def test_serialize_canonical_example():
    assert serialize(one_step(15.0, 27.5, 4.0, -1.5)) == "<seg_start> 15.0 to 27.5 <offset> 4.0 and -1.5 <seg_end>"


def test_serialize_zero_offsets():
    assert serialize(one_step(10.0, 20.0, 0.0, 0.0)) == "<seg_start> 10.0 to 20.0 <offset> 0.0 and 0.0 <seg_end>"


def test_serialize_negative_zero_has_no_sign():
    assert "-0.0" not in serialize(one_step(10.0, 20.0, -0.0, -0.01))


def test_two_steps_have_one_refine():
    seq = RefinementSequence(one_step(1, 2, 0, 0).steps + one_step(3, 4, 0, 0).steps)
    text = serialize(seq)
    assert text.count("<refine>") == 1
    assert text.index("2.0") < text.index("<refine>") < text.index("3.0")


def test_parse_tolerates_suffix_and_plus_sign():
    text = "from <seg_start> 15.0s to 27.5s <offset> +4.0s and -1.5s <seg_end> done"
    out = parse(text)
    assert out.sequences == [one_step(15.0, 27.5, 4.0, -1.5)]
    assert out.diagnostics == []
    assert [text[a:b].strip() for a, b in out.unparsed_spans] == ["from", "done"]


def test_incomplete_step_diagnosed():
    out = parse("<seg_start> 15.0 to <seg_end>")
    assert out.sequences == []
    assert len(out.diagnostics) == 1
    assert "incomplete step" in out.diagnostics[0].message


def test_no_block_is_explained():
    out = parse("the event happens at the start")
    assert out.sequences == [] and out.diagnostics
    assert out.unparsed_spans == [(0, 30)]


def test_nested_seg_start_restarts_block():
    good = serialize(one_step(1.0, 2.0, 0.5, -0.5))
    out = parse("<seg_start> 3.0 to " + good)
    assert out.sequences == [one_step(1.0, 2.0, 0.5, -0.5)]
    assert any("nested" in d.message for d in out.diagnostics)


def test_unterminated_and_stray_markers():
    out = parse("<seg_end> x <seg_start> 1.0 to 2.0 <offset> 0.0 and 0.0")
    assert out.sequences == []
    msgs = " ".join(d.message for d in out.diagnostics)
    assert "without <seg_start>" in msgs and "unterminated" in msgs


def test_inverted_segment_in_output_is_a_diagnostic():
    out = parse("<seg_start> 9.0 to 2.0 <offset> 0.0 and 0.0 <seg_end>")
    assert out.sequences == [] and "invalid step" in out.diagnostics[0].message


def test_embed_round_trip():
    seq = one_step(15.0, 27.5, 4.0, -1.5)
    assert parse(embed_in_answer("The event is", seq, ".")).sequences == [seq]
    assert embed_in_answer("", seq, "") == serialize(seq)


def test_two_embedded_blocks_in_order(rng):
    a, b = random_sequence(rng), random_sequence(rng)
    text = embed_in_answer(embed_in_answer("first", a, "then"), b, "end")
    assert parse(text).sequences == [a, b]


def test_round_trip_random(rng):
    for _ in range(2000):
        seq = random_sequence(rng)
        assert parse(serialize(seq)).sequences == [seq]


def test_serialization_injective(rng):
    seqs = {random_sequence(rng, k=2, horizon=3.0) for _ in range(3000)}
    texts = {serialize(s) for s in seqs}
    assert len(texts) == len(seqs)


@settings(max_examples=300)
@given(st.text())
def test_parser_total_on_text(text):
    out = parse(text)
    assert out.sequences or out.diagnostics


@settings(max_examples=300)
@given(st.lists(st.sampled_from(["<seg_start>", "<seg_end>", "<refine>", "<offset>", " to ", " and ",
                                 "1.5", "-2", "+3.0s", "x", " "]), max_size=30))
def test_parser_total_on_token_soup(parts):
    out = parse("".join(parts))
    assert out.sequences or out.diagnostics


def test_parser_total_on_random_bytes():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        raw = rng.integers(0, 256, size=int(rng.integers(0, 80)), dtype=np.uint8).tobytes()
        out = parse(raw.decode("utf-8", errors="replace"))
        assert out.sequences or out.diagnostics


def test_non_text_input_does_not_raise():
    assert parse(None).diagnostics
