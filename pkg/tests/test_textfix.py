import pytest
from hypothesis import given, settings, strategies as st

from cardex.errors import ConfigError, DateError
from cardex.textfix import (
    CorrectionOutcome,
    Lexicon,
    SubstitutionRule,
    SubstitutionTable,
    apply_substitutions,
    correct_token,
    default_district_lexicon,
    default_gender_lexicon,
    default_substitutions,
    levenshtein,
    normalize_date,
    normalize_token,
    similarity,
    standardize_gender,
)


def levenshtein_oracle(a: str, b: str) -> int:
    """Classic full-matrix dynamic program."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[-1][-1]


TEXT_ALPHABET = st.characters(
    whitelist_categories=("Lu", "Ll", "Lo", "Nd"), max_codepoint=0x0970
)


class TestLevenshtein:
    def test_known_pairs(self):
        assert levenshtein("kitten", "sitting") == 3
        assert levenshtein("", "abc") == 3
        assert levenshtein("abc", "abc") == 0
        assert levenshtein("काठमाडौं", "काठमाडौ") == 1

    @given(st.text(TEXT_ALPHABET, max_size=12), st.text(TEXT_ALPHABET, max_size=12))
    @settings(max_examples=200)
    def test_matches_dp_oracle(self, a, b):
        assert levenshtein(a, b) == levenshtein_oracle(a, b)

    @given(st.text(TEXT_ALPHABET, max_size=10), st.text(TEXT_ALPHABET, max_size=10))
    @settings(max_examples=100)
    def test_symmetric(self, a, b):
        assert levenshtein(a, b) == levenshtein(b, a)

    @given(
        st.text(TEXT_ALPHABET, max_size=8),
        st.text(TEXT_ALPHABET, max_size=8),
        st.text(TEXT_ALPHABET, max_size=8),
    )
    @settings(max_examples=100)
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    def test_similarity(self):
        assert similarity("", "") == 1.0
        assert similarity("abc", "abc") == 1.0
        assert similarity("abcd", "abce") == 0.75
        assert similarity("Kaskl", "Kaski") == pytest.approx(0.8)


class TestNormalizeToken:
    def test_trims_and_collapses_whitespace(self):
        assert normalize_token("  राम   बहादुर \t थापा \n") == "राम बहादुर थापा"


class TestCorrection:
    LEX = Lexicon("districts", ("Kaski", "Kathmandu", "Lalitpur"))

    def test_correct_above_threshold(self):
        outcome = correct_token("Kaskl", self.LEX)
        assert outcome == CorrectionOutcome("Kaski", True, 0.8, outcome.candidate_rank)
        assert outcome.candidate_rank[0][0] == "Kaski"

    def test_below_threshold_returns_raw(self):
        outcome = correct_token("zzzzz", self.LEX)
        assert outcome.value == "zzzzz"
        assert not outcome.applied

    def test_exact_match(self):
        outcome = correct_token("Kathmandu", self.LEX)
        assert outcome.value == "Kathmandu"
        assert outcome.similarity == 1.0

    def test_tie_breaks_are_order_independent(self):
        a = Lexicon("x", ("abcd", "abce"), threshold=0.5)
        b = Lexicon("x", ("abce", "abcd"), threshold=0.5)
        # "abcf" is distance 1 from both entries; lexicographic tie-break
        assert correct_token("abcf", a).value == "abcd"
        assert correct_token("abcf", b).value == "abcd"

    def test_duplicate_entries_rejected(self):
        with pytest.raises(ConfigError):
            Lexicon("x", ("a", "a"))

    def test_default_district_lexicon(self):
        lex = default_district_lexicon()
        assert "Kaski" in lex.entries
        assert len(lex.entries) == 77
        assert correct_token("Kaskl", lex).value == "Kaski"


class TestGender:
    def test_devanagari_to_code(self):
        lex = default_gender_lexicon()
        assert standardize_gender("पुरुष", lex).value == "male"
        assert standardize_gender("महिला", lex).value == "female"

    def test_fuzzy_surface_form(self):
        lex = default_gender_lexicon()
        outcome = standardize_gender("पुरूष", lex)  # OCR-corrupted vowel sign
        assert outcome.value == "male"
        assert outcome.applied

    def test_unmatched_passes_through(self):
        lex = default_gender_lexicon()
        outcome = standardize_gender("qqqqqq", lex)
        assert outcome.value == "qqqqqq"
        assert not outcome.applied

    def test_requires_mapping(self):
        with pytest.raises(ConfigError):
            standardize_gender("x", Lexicon("plain", ("a",)))


class TestSubstitutions:
    TABLE = SubstitutionTable(
        (
            SubstitutionRule("O", "0", "citizenship_number"),
            SubstitutionRule("l", "1", "citizenship_number"),
            SubstitutionRule("ab", "X"),
        )
    )

    def test_scoped_rules(self):
        assert apply_substitutions("O1-lO", self.TABLE, "citizenship_number") == "01-10"
        assert apply_substitutions("O1-lO", self.TABLE, "name") == "O1-lO"

    def test_unscoped_rule_applies_everywhere(self):
        assert apply_substitutions("abab", self.TABLE, "name") == "XX"

    def test_single_pass_no_fixpoint(self):
        table = SubstitutionTable((SubstitutionRule("aa", "a"),))
        assert apply_substitutions("aaaa", table) == "aa"

    def test_rule_order_is_listed_order(self):
        table = SubstitutionTable((SubstitutionRule("a", "b"), SubstitutionRule("b", "c")))
        assert apply_substitutions("a", table) == "c"

    def test_default_table_fixes_citizenship_digits(self):
        fixed = apply_substitutions("12-O1-75-O1234", default_substitutions(), "citizenship_number")
        assert fixed == "12-01-75-01234"

    def test_default_table_leaves_names_alone(self):
        assert apply_substitutions("Olga", default_substitutions(), "name") == "Olga"


class TestNormalizeDate:
    def test_devanagari_digits(self):
        assert normalize_date("२०४५/०३/१२") == "2045-03-12"

    def test_separator_variants(self):
        for raw in ("2045-03-12", "2045/03/12", "2045.03.12", "2045 03 12"):
            assert normalize_date(raw) == "2045-03-12"

    def test_single_digit_fields_padded(self):
        assert normalize_date("2045-3-2") == "2045-03-02"

    def test_day_32_allowed(self):
        assert normalize_date("2046-01-32") == "2046-01-32"

    def test_month_13_rejected(self):
        with pytest.raises(DateError):
            normalize_date("2045-13-01")

    def test_day_33_rejected(self):
        with pytest.raises(DateError):
            normalize_date("2045-01-33")

    def test_shape_mismatch_rejected(self):
        for raw in ("20450312", "45-03-12", "2045-03", "abcd-ef-gh"):
            with pytest.raises(DateError):
                normalize_date(raw)

    def test_error_carries_raw_string(self):
        with pytest.raises(DateError) as exc:
            normalize_date("nonsense")
        assert exc.value.raw == "nonsense"


class TestLexiconFiles:
    def test_from_file(self, tmp_path):
        f = tmp_path / "lex.txt"
        f.write_text("# comment\nKaski\nsurface\tcode\n\n", encoding="utf-8")
        lex = Lexicon.from_file(f)
        assert lex.entries == ("Kaski", "surface")
        assert lex.mapping == {"surface": "code"}

    def test_substitutions_from_file(self, tmp_path):
        f = tmp_path / "subs.txt"
        f.write_text("O\t0\tcitizenship_number\na\tb\n", encoding="utf-8")
        table = SubstitutionTable.from_file(f)
        assert table.rules[0].scope == "citizenship_number"
        assert table.rules[1].scope == "all"

    def test_bad_substitution_line(self, tmp_path):
        f = tmp_path / "subs.txt"
        f.write_text("missing-tab\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            SubstitutionTable.from_file(f)
