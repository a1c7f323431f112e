"""The person-centered metric suite on contrasting responses.

Scores a reflective, marker-rich reply against a directive, formulaic one
for the same client turn, with and without the embedding channel, then
shows the semantic precision/recall/F1 matcher.
"""

from pathlib import Path

from congruity import (
    empathic_authenticity,
    load_marker_lexicons,
    load_vectors,
    pct_adherence,
    question_density,
    responsive_engagement,
    rogers_conditions,
    semantic_prf,
    therapeutic_concision,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

lex = load_marker_lexicons()
store = load_vectors(FIXTURES / "vectors.txt")

client = "I lost my job last month and I haven't told my family yet."
reflective = ("Right, that sounds like a heavy secret to carry. "
              "I'm wondering what's holding you back from telling them?")
formulaic = ("I'm so sorry to hear that. You should tell your family "
             "as soon as possible, you need to be honest with them.")

for label, response in (("reflective", reflective), ("formulaic", formulaic)):
    ea = empathic_authenticity(response, lex)
    re_ = responsive_engagement(response, client, lex, store)
    tc = therapeutic_concision(response, lex)
    rogers = rogers_conditions(response, lex, store)
    pct = pct_adherence(response, client, lex, store)
    qd = question_density(response)
    print(f"\n{label}: {response!r}")
    print(f"  authenticity        {ea.value:.3f}  (hits {ea.marker_hits})")
    print(f"  responsiveness      {re_.value:.3f}  (mirror {re_.components['mirror']:.3f})")
    print(f"  concision           {tc.value:.3f}")
    print(f"  core conditions     understanding={rogers.empathic_understanding:.2f} "
          f"regard={rogers.positive_regard:.2f} congruence={rogers.congruence:.2f}")
    print(f"  adherence composite {pct.value:.3f}")
    print(f"  question density    {qd.value:.2f}")

print("\nsemantic matching against the recorded counsellor turn:")
reference = "That sounds like a heavy secret to carry. What's holding you back from telling them?"
for label, response in (("reflective", reflective), ("formulaic", formulaic)):
    prf = semantic_prf(response, reference, store)
    print(f"  {label}: P={prf.precision:.3f} R={prf.recall:.3f} F1={prf.f1:.3f}")
