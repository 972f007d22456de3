"""
Reading and writing refinement text
===================================

The model answers in plain text. The codec writes one canonical form and
reads a looser one.
"""

from timerefine import parse, serialize
from timerefine.grammar import embed_in_answer

answer = ("The man pours coffee at <seg_start> 10.1s to 20.5s <offset> +8.5s and +3.3s "
          "<refine> 18.6s to 23.8s <offset> 0.0s and 0.0s <seg_end>.")
out = parse(answer)
seq = out.sequences[0]
print(seq.as_lists())
print("free text around the block:", [answer[a:b] for a, b in out.unparsed_spans])

# canonical output: one decimal, no unit, no plus sign
print(serialize(seq))
print(embed_in_answer("The event happens at", seq, "."))

# broken answers produce diagnostics, never exceptions
for bad in ["<seg_start> 1.0 to 2.0 <offset> 0.5 <seg_end>",
            "<seg_start> 5.0 to 3.0 <offset> 0.0 and 0.0 <seg_end>",
            "<seg_start> 1.0 to 2.0 <offset> 0.0 and 0.0",
            "no timestamps at all"]:
    res = parse(bad)
    print(res.ok, [d.message for d in res.diagnostics])
