import pytest
from hypothesis import given, settings, strategies as st

from aggdetect import translit
from aggdetect.preprocess import (
    CleanConfig,
    PreprocessSettings,
    ScriptProfile,
    SpellDictionary,
    clean_text,
    load_spell_dictionary,
    save_spell_dictionary,
    script_profile,
    spell_correct,
    transliterate_devanagari,
)


class TestCleanText:
    def test_url_removal_and_lowercase(self):
        assert clean_text("Visit http://x.co NOW") == "visit now"

    def test_minor_stemming(self):
        # "running" loses "ing", "dogs" its plural s, "John's" the possessive
        assert clean_text("running dogs John's") == "runn dog john"

    def test_empty(self):
        assert clean_text("") == ""

    def test_email_removal(self):
        assert clean_text("mail me at bob@example.com ok") == "mail me at ok"

    def test_standalone_numbers_removed_embedded_kept(self):
        assert clean_text("call 911 b4 noon") == "call b4 noon"

    def test_expansions(self):
        assert clean_text("u r great") == "you are great"

    def test_exception_list_blocks_plural_strip(self):
        assert clean_text("this is his") == "this is his"

    def test_whitespace_collapsed(self):
        assert clean_text("a\t\tb\n c  ") == "a b c"

    def test_flags_can_disable_stages(self):
        config = CleanConfig(lowercase=False, minor_stemming=False, expansions={})
        assert clean_text("Running DOGS u", config) == "Running DOGS u"

    def test_stem_cascades_to_fixed_point(self):
        # one pass must land on a stemming fixed point
        assert clean_text("passings") == clean_text(clean_text("passings"))

    @given(st.text(max_size=120))
    @settings(max_examples=300)
    def test_idempotent(self, text):
        once = clean_text(text)
        assert clean_text(once) == once

    @given(st.text(alphabet="abs4u'i ngdo.", max_size=40))
    @settings(max_examples=300)
    def test_idempotent_on_suffix_heavy_text(self, text):
        once = clean_text(text)
        assert clean_text(once) == once


class TestScriptProfile:
    def test_pure_latin(self):
        profile = script_profile("abc")
        assert profile == ScriptProfile(0.0, 1.0, 0.0)

    def test_pure_devanagari(self):
        profile = script_profile("कखगघ")
        assert profile.devanagari_fraction == 1.0

    def test_mixed_with_punctuation(self):
        profile = script_profile("ab, कख!")
        assert profile.latin_fraction == pytest.approx(0.5)
        assert profile.devanagari_fraction == pytest.approx(0.5)

    def test_no_letters(self):
        assert script_profile("123 !?") == ScriptProfile(0.0, 0.0, 0.0)

    def test_other_scripts_counted(self):
        profile = script_profile("ab中文")  # two Latin + two CJK
        assert profile.other_fraction == pytest.approx(0.5)

    @given(st.text(max_size=80))
    def test_fractions_sum_to_one_or_zero(self, text):
        profile = script_profile(text)
        total = profile.devanagari_fraction + profile.latin_fraction + profile.other_fraction
        assert total == pytest.approx(1.0, abs=1e-9) or total == 0.0


class TestTransliteration:
    def test_latin_passthrough(self):
        assert transliterate_devanagari("hello world!") == "hello world!"

    def test_consonant_with_vowel_sign(self):
        assert transliterate_devanagari("का") == "kaa"  # KA + AA sign

    def test_virama_suppresses_inherent_vowel(self):
        assert transliterate_devanagari("क्य") == "kya"  # KA + virama + YA

    def test_inherent_vowel_on_final_consonant(self):
        assert transliterate_devanagari("कब") == "kaba"

    def test_anusvara_and_visarga(self):
        assert transliterate_devanagari("हं") == "han"
        assert transliterate_devanagari("कः") == "kah"

    def test_digits_and_danda(self):
        assert transliterate_devanagari("१२।") == "12."

    def test_mixed_script_line(self):
        out = transliterate_devanagari("ok क्या?")
        assert out == "ok kyaa?"

    def test_no_devanagari_left_on_table_domain(self):
        """Every codepoint the table covers must romanize completely."""
        covered = "".join(ch for ch, _roman, _kind in translit.table_rows())
        romanized, unknown = translit.transliterate_with_count(covered)
        assert unknown == 0
        assert not any(translit.is_devanagari(ch) for ch in romanized)

    def test_unknown_codepoints_pass_through_and_count(self):
        text = "कॾ"  # KA + DDDA (not in table)
        romanized, unknown = translit.transliterate_with_count(text)
        assert unknown == 1
        assert "ॾ" in romanized

    @given(st.text(max_size=60))
    def test_total_function(self, text):
        transliterate_devanagari(text)  # never raises


class TestSpellCorrect:
    def test_in_dictionary_kept(self):
        d = SpellDictionary({"dog": 5})
        assert spell_correct(["dog"], d) == ["dog"]

    def test_transposition_corrects(self):
        d = SpellDictionary({"dog": 5, "dig": 2})
        assert spell_correct(["dgo"], d) == ["dog"]

    def test_frequency_breaks_ties(self):
        # both "dog" and "dig" are one insert away from "dg"
        d = SpellDictionary({"dog": 5, "dig": 2})
        assert spell_correct(["dg"], d) == ["dog"]

    def test_lexicographic_tie_break(self):
        d = SpellDictionary({"dig": 3, "dog": 3})
        assert spell_correct(["dg"], d) == ["dig"]

    def test_no_candidate_keeps_token(self):
        d = SpellDictionary({"dog": 5})
        assert spell_correct(["zzzz"], d) == ["zzzz"]

    def test_substitution_and_deletion(self):
        d = SpellDictionary({"hate": 4})
        assert spell_correct(["hbte"], d) == ["hate"]   # substitution
        assert spell_correct(["hatte"], d) == ["hate"]  # deletion

    @given(st.lists(st.sampled_from(["dog", "dig", "cat", "hate"]), max_size=8))
    def test_dictionary_tokens_never_change(self, tokens):
        d = SpellDictionary({"dog": 5, "dig": 2, "cat": 9, "hate": 1})
        assert spell_correct(tokens, d) == tokens


class TestSpellDictionaryIO:
    def test_round_trip(self, tmp_path):
        d = SpellDictionary({"dog": 5, "cat": 2})
        path = tmp_path / "dict.tsv"
        save_spell_dictionary(d, path)
        loaded = load_spell_dictionary(path)
        assert loaded.entries == d.entries

    def test_rejects_bad_rows(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("dog\tfive\n", encoding="utf-8")
        with pytest.raises(Exception, match="line 1"):
            load_spell_dictionary(path)


class TestPreprocessSettings:
    def test_transliterates_then_cleans(self):
        settings = PreprocessSettings(clean=CleanConfig(), transliterate=True)
        assert settings.apply("OK क्या") == "ok kyaa"

    def test_transliteration_only_when_devanagari_present(self):
        settings = PreprocessSettings(clean=CleanConfig(), transliterate=True)
        assert settings.apply("Plain Text") == "plain text"

    def test_spell_correction_applies_after_cleaning(self):
        settings = PreprocessSettings(
            clean=CleanConfig(),
            spell_dictionary=SpellDictionary({"dog": 3, "you": 1}),
        )
        assert settings.apply("DGO u") == "dog you"
