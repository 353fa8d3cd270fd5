import random
import string

import pytest

from textkg.validation import (
    CONSISTENCY_VIOLATION,
    GRAMMARS,
    PATTERN_MISMATCH,
    validate_response,
)


class TestEntityGrammar:
    def test_well_formed_line_parses_three_fields(self):
        report = validate_response(
            "1. Cagliari | The capital of Sardinia | City; Tourist Destination",
            "entity-line",
        )
        assert len(report.accepted) == 1
        fields = report.accepted[0].fields
        assert fields["label"] == "Cagliari"
        assert fields["description"] == "The capital of Sardinia"
        assert fields["types"] == ["City", "Tourist Destination"]

    def test_prose_line_rejected(self):
        report = validate_response("Cagliari is a city", "entity-line")
        assert report.rejected == [("Cagliari is a city", PATTERN_MISMATCH)]

    def test_one_malformed_among_five(self):
        lines = "\n".join(
            [
                "1. A | a description | T",
                "2. B | another | T",
                "3. C has no pipes at all",
                "4. D | described | T1; T2",
                "5. E | last | ",
            ]
        )
        report = validate_response(lines, "entity-line")
        assert len(report.accepted) == 4
        assert len(report.rejected) == 1
        assert report.rejected[0][1] == PATTERN_MISMATCH

    def test_empty_types_allowed(self):
        report = validate_response("1. X | desc |", "entity-line")
        assert report.accepted[0].fields["types"] == []


class TestMentionGrammar:
    reference = ["Cagliari", "Marina District", "Bastione di Santa Croce"]

    def test_yes_no_parse(self):
        report = validate_response("1. Cagliari - yes", "mention-line", self.reference)
        assert report.accepted[0].fields["answer"] is True

    def test_label_id_mismatch_rejected(self):
        report = validate_response("2. Cagliari - yes", "mention-line", self.reference)
        assert report.rejected == [("2. Cagliari - yes", CONSISTENCY_VIOLATION)]

    def test_wrong_label_for_entry_three(self):
        report = validate_response("3. Cagliari - yes", "mention-line", self.reference)
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION

    def test_out_of_range_number_rejected(self):
        report = validate_response("9. Cagliari - yes", "mention-line", self.reference)
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION

    def test_case_insensitive_label_match(self):
        report = validate_response("2. marina district - no", "mention-line", self.reference)
        assert report.accepted[0].fields["answer"] is False


class TestRelationGrammar:
    reference = ["Cagliari", "Bastione di Santa Croce"]

    def test_well_formed_triple(self):
        line = "(1) Cagliari; has landmark; (2) Bastione di Santa Croce"
        report = validate_response(line, "relation-line", self.reference)
        fields = report.accepted[0].fields
        assert fields["subject"] == 1
        assert fields["predicate"] == "has landmark"
        assert fields["object"] == 2

    def test_member_outside_reference_rejected(self):
        line = "(1) Cagliari; has landmark; (3) Poetto Beach"
        report = validate_response(line, "relation-line", self.reference)
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION

    def test_self_relation_rejected(self):
        line = "(1) Cagliari; includes; (1) Cagliari"
        report = validate_response(line, "relation-line", self.reference)
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION

    def test_missing_id_echo_rejected(self):
        report = validate_response(
            "Cagliari; has landmark; Bastione di Santa Croce",
            "relation-line",
            self.reference,
        )
        assert report.rejected[0][1] == PATTERN_MISMATCH


class TestDescriptionGrammar:
    def test_parse(self):
        report = validate_response(
            "has landmark :: Expresses a relationship between a place and a landmark located in it",
            "description-line",
            ["has landmark"],
        )
        assert report.accepted[0].fields["label"] == "has landmark"

    def test_unknown_predicate_rejected(self):
        report = validate_response(
            "has beach :: Something", "description-line", ["has landmark"]
        )
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION


class TestGroupGrammar:
    reference = ["car", "automobile", "motorcycle", "motorbike"]

    def test_groups_parse(self):
        text = "(1) car; (2) automobile\n(3) motorcycle; (4) motorbike"
        report = validate_response(text, "group-line", self.reference)
        assert [line.fields["members"] for line in report.accepted] == [[1, 2], [3, 4]]

    def test_none_line_accepted_empty(self):
        report = validate_response("none", "group-line", self.reference)
        assert report.accepted[0].fields["members"] == []

    def test_member_claimed_twice_rejects_second_line(self):
        text = "(1) car; (2) automobile\n(2) automobile; (3) motorcycle"
        report = validate_response(text, "group-line", self.reference)
        assert len(report.accepted) == 1
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION

    def test_unknown_member_rejected(self):
        report = validate_response("(9) tram", "group-line", self.reference)
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION


class TestHypernymGrammar:
    reference = ["legumes", "green vegetables", "pork"]

    def test_parse(self):
        line = "vegetables | is type of | (1) legumes; (2) green vegetables"
        report = validate_response(line, "hypernym-line", self.reference)
        fields = report.accepted[0].fields
        assert fields["hypernym"] == "vegetables"
        assert fields["relation"] == "is type of"
        assert fields["members"] == [1, 2]

    def test_double_coverage_rejected(self):
        text = (
            "vegetables | is type of | (1) legumes\n"
            "greens | is type of | (1) legumes; (2) green vegetables"
        )
        report = validate_response(text, "hypernym-line", self.reference)
        assert len(report.accepted) == 1
        assert report.rejected[0][1] == CONSISTENCY_VIOLATION


class TestExhaustiveness:
    def test_unknown_grammar(self):
        with pytest.raises(ValueError):
            validate_response("x", "sql")

    def test_accepted_plus_rejected_equals_total(self):
        rng = random.Random(99)
        alphabet = string.ascii_letters + string.digits + " .|;()-:"
        for grammar in GRAMMARS:
            for _ in range(40):
                n_lines = rng.randint(0, 8)
                lines = []
                for _ in range(n_lines):
                    lines.append("".join(rng.choices(alphabet, k=rng.randint(1, 40))))
                text = "\n".join(lines)
                reference = ["alpha", "beta"] if rng.random() < 0.5 else None
                report = validate_response(text, grammar, reference)
                non_blank = [l for l in text.splitlines() if l.strip()]
                assert report.total_lines == len(non_blank)
