"""Keep the frozen cross-language verdict fixture in sync with the grammar.

frontend/ runs its client-side validator against the same file; if the
grammar ever changes, this test pins exactly where the two sides diverge.
"""

import json
from pathlib import Path

from emphst.markup import TagDialect, validate

FIXTURE = Path(__file__).parent / "fixtures" / "markup_cases.json"


def test_fixture_matches_grammar_verdicts():
    cases = json.loads(FIXTURE.read_text(encoding="utf-8"))
    assert len(cases) == 20
    tagged_strings = {c["tagged"] for c in cases}
    assert "**a" in tagged_strings and "**a**" in tagged_strings
    for case in cases:
        violations = validate(case["tagged"], TagDialect.MARKDOWN)
        assert (not violations) == case["valid"], case["tagged"]
        if violations:
            assert violations[0].kind.value == case["first_violation"]["kind"], case["tagged"]
            assert violations[0].position == case["first_violation"]["position"], case["tagged"]
        else:
            assert case["first_violation"] is None
