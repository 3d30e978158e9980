from datetime import date

import pytest

from bailpred.diagnostics import Diagnostics
from bailpred.features import (KeywordTable, age_group_of, classify_crime,
                               default_keyword_table, derive_features)
from bailpred.records import AgeGroup, CrimeCategory

from .conftest import make_record

# Keyword-table oracle: expectations written against the shipped TSV before
# wiring it through classify_crime.
KEYWORD_CASES = [
    ("accused stole a motorcycle from the complainant", CrimeCategory.THEFT),
    ("the accused murdered his business partner", CrimeCategory.MURDER),
    ("accused committed rape upon the victim", CrimeCategory.RAPE),
    ("cheated the bank with forged documents", CrimeCategory.FRAUD),
    ("found in possession of narcotic substances", CrimeCategory.DRUG),
    ("attacked the victim with a wooden stick", CrimeCategory.ASSAULT),
    ("the child was kidnapped for ransom", CrimeCategory.KIDNAPPING),
    ("subjected his wife to cruelty over dowry", CrimeCategory.DOMESTIC_VIOLENCE),
    ("embezzled company funds over three years", CrimeCategory.WHITE_COLLAR),
    ("sexual assault on a minor on the school premises", CrimeCategory.SEXUAL_ASSAULT),
    ("dispute over property boundary", CrimeCategory.OTHER),
]


class TestClassifyCrime:
    @pytest.mark.parametrize("text,expected", KEYWORD_CASES)
    def test_keyword_table(self, text, expected):
        assert classify_crime(text) == expected

    def test_specific_beats_generic(self):
        # "sexual assault" must not fall through to plain Assault.
        assert classify_crime("a brutal sexual assault was alleged") == CrimeCategory.SEXUAL_ASSAULT

    def test_empty_precondition(self):
        with pytest.raises(ValueError):
            classify_crime("")

    def test_llm_classifier_mapped(self):
        assert classify_crime("anything", classifier=lambda t: "Murder") == CrimeCategory.MURDER
        assert classify_crime("anything", classifier=lambda t: " theft. ") == CrimeCategory.THEFT
        assert classify_crime("anything", classifier=lambda t: "domestic violence") \
            == CrimeCategory.DOMESTIC_VIOLENCE

    def test_llm_unknown_label_falls_back(self):
        diagnostics = Diagnostics()
        got = classify_crime("accused stole a bicycle", classifier=lambda t: "jaywalking",
                             diagnostics=diagnostics)
        assert got == CrimeCategory.THEFT
        assert len(diagnostics.warnings) == 1

    def test_llm_failure_falls_back_with_warning(self):
        def broken(text):
            raise ConnectionError("endpoint down")

        diagnostics = Diagnostics()
        got = classify_crime("accused stole a bicycle", classifier=broken,
                             diagnostics=diagnostics)
        assert got == CrimeCategory.THEFT
        assert any("fallback" in w.message for w in diagnostics.warnings)

    def test_custom_table_from_file(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("# comment\ncattle\tTheft\n", encoding="utf-8")
        table = KeywordTable.load(path)
        assert table.classify("cattle lifting at night") == CrimeCategory.THEFT
        assert table.classify("no match here") == CrimeCategory.OTHER

    def test_default_table_loads_once(self):
        assert default_keyword_table() is default_keyword_table()


class TestAgeGroups:
    @pytest.mark.parametrize("age,expected", [
        (11, AgeGroup.UNDER_18), (17, AgeGroup.UNDER_18),
        (18, AgeGroup.A18_TO_30), (25, AgeGroup.A18_TO_30), (29, AgeGroup.A18_TO_30),
        (30, AgeGroup.A30_TO_50), (49, AgeGroup.A30_TO_50),
        (50, AgeGroup.A50_TO_65), (64, AgeGroup.A50_TO_65),
        (65, AgeGroup.A65_PLUS), (67, AgeGroup.A65_PLUS), (95, AgeGroup.A65_PLUS),
    ])
    def test_boundaries(self, age, expected):
        assert age_group_of(age) == expected


class TestDeriveFeatures:
    def test_custody_days(self):
        record = make_record(date_of_arrest=date(2020, 1, 1),
                             date_of_judgment=date(2020, 4, 10))
        assert derive_features(record).custody_days == 100

    def test_absent_inputs_absent_outputs(self):
        record = make_record(age=None, date_of_arrest=None, date_of_judgment=None)
        feats = derive_features(record)
        assert feats.custody_days is None
        assert feats.age_group is None
        assert feats.crime_category is not None

    def test_one_date_missing_means_no_custody(self):
        record = make_record(date_of_arrest=None, date_of_judgment=date(2020, 4, 10))
        assert derive_features(record).custody_days is None

    def test_age_group_from_age(self):
        assert derive_features(make_record(age=67)).age_group == AgeGroup.A65_PLUS
        assert derive_features(make_record(age=25)).age_group == AgeGroup.A18_TO_30

    def test_pure(self):
        record = make_record()
        assert derive_features(record) == derive_features(record)

    def test_custody_never_negative(self):
        from .conftest import build_corpus_12
        for record in build_corpus_12():
            days = derive_features(record).custody_days
            assert days is None or days >= 0
