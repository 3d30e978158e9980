import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bailpred.experiments import (AmbiguousPredictionError, SetupId,
                                  build_prediction_prompt, confidence_from_logprobs,
                                  make_setups, map_outcome_to_binary, parse_prediction,
                                  prompt_leaks_gold, render_setup_prompts, run_setup,
                                  write_prediction_set)
from bailpred.gateway import (BackendReplyError, EndpointConfig, Gateway,
                              GenerationResult)
from bailpred.records import BailType, Outcome
from bailpred.statutes import ingest_statutes

from .conftest import STATUTE_DIR, build_corpus_12, make_record

MOCK_ROLES = {role: EndpointConfig(id=role, kind="mock")
              for role in ("base", "ft1", "ft2")}


class TestSetupMatrix:
    def test_context_policy(self):
        setups = make_setups(MOCK_ROLES)
        with_ctx = {sid for sid, s in setups.items() if s.with_statute_context}
        assert with_ctx == {SetupId.S2_VANILLA_CTX, SetupId.S5_FT1_CTX, SetupId.S6_FT2_CTX}

    def test_endpoint_sharing(self):
        setups = make_setups(MOCK_ROLES)
        assert setups[SetupId.S1_VANILLA].endpoint is setups[SetupId.S2_VANILLA_CTX].endpoint
        assert setups[SetupId.S3_FT1].endpoint is setups[SetupId.S5_FT1_CTX].endpoint
        assert setups[SetupId.S4_FT2].endpoint is setups[SetupId.S6_FT2_CTX].endpoint

    def test_missing_role_rejected(self):
        with pytest.raises(ValueError, match="ft2"):
            make_setups({"base": MOCK_ROLES["base"], "ft1": MOCK_ROLES["ft1"]})


class TestOutcomeMapping:
    @pytest.mark.parametrize("outcome,bail_type,expected", [
        (Outcome.GRANTED, BailType.REGULAR, 1),
        (Outcome.GRANTED, BailType.ANTICIPATORY, 1),
        (Outcome.NOT_GRANTED, BailType.REGULAR, 0),
        (Outcome.NOT_GRANTED, BailType.ANTICIPATORY, 0),
        (Outcome.CANCELLED, BailType.CANCELLATION, 1),
        (Outcome.NOT_CANCELLED, BailType.CANCELLATION, 0),
    ])
    def test_mapping(self, outcome, bail_type, expected):
        assert map_outcome_to_binary(outcome, bail_type) == expected

    @pytest.mark.parametrize("outcome,bail_type", [
        (Outcome.CANCELLED, BailType.REGULAR),
        (Outcome.GRANTED, BailType.CANCELLATION),
        (Outcome.NOT_GRANTED, BailType.CANCELLATION),
        (Outcome.NOT_CANCELLED, BailType.ANTICIPATORY),
    ])
    def test_invalid_pairing(self, outcome, bail_type):
        with pytest.raises(ValueError):
            map_outcome_to_binary(outcome, bail_type)

    def test_bijection_per_family(self):
        regular = {map_outcome_to_binary(o, BailType.REGULAR)
                   for o in (Outcome.GRANTED, Outcome.NOT_GRANTED)}
        cancellation = {map_outcome_to_binary(o, BailType.CANCELLATION)
                        for o in (Outcome.CANCELLED, Outcome.NOT_CANCELLED)}
        assert regular == cancellation == {0, 1}


class TestConfidence:
    def test_symmetric(self):
        score = confidence_from_logprobs({"0": -1.3, "1": -1.3})
        assert score.p0 == score.p1 == 50.0

    def test_ninety_ten(self):
        score = confidence_from_logprobs({"0": math.log(0.9), "1": math.log(0.1)})
        assert abs(score.p0 - 90.0) < 1e-9
        assert abs(score.p1 - 10.0) < 1e-9

    def test_extreme_magnitudes_no_overflow(self):
        score = confidence_from_logprobs({"0": -1000.0, "1": 0.0})
        assert score.p0 < 1e-6
        assert abs(score.p1 - 100.0) < 1e-6

    def test_missing_entry_rejected(self):
        with pytest.raises(ValueError):
            confidence_from_logprobs({"1": -0.5})

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=-1000, max_value=1000),
           st.floats(min_value=-1000, max_value=1000))
    def test_sums_to_hundred(self, l0, l1):
        score = confidence_from_logprobs({"0": l0, "1": l1})
        assert abs(score.p0 + score.p1 - 100.0) < 1e-6
        assert score.p0 >= 0 and score.p1 >= 0


class TestParsePrediction:
    def test_labeled_format(self):
        label, rationale, conditions = parse_prediction(
            "1\nREASONING: custody exceeded half the maximum sentence\n"
            "CONDITIONS: surety bond")
        assert label == 1
        assert rationale == "custody exceeded half the maximum sentence"
        assert conditions == "surety bond"

    def test_phrase_cascade_negation_first(self):
        label, rationale, _ = parse_prediction("The bail is not granted because of antecedents.")
        assert label == 0
        assert "antecedents" in rationale

    def test_cancelled_phrase(self):
        assert parse_prediction("the earlier bail is hereby cancelled for misuse")[0] == 1

    def test_ambiguous_rejected(self):
        with pytest.raises(AmbiguousPredictionError):
            parse_prediction("maybe")

    def test_digit_only_without_rationale_rejected(self):
        with pytest.raises(AmbiguousPredictionError):
            parse_prediction("1")

    def test_missing_conditions_empty(self):
        label, rationale, conditions = parse_prediction("0\nREASONING: weak recovery")
        assert (label, conditions) == (0, "")
        assert rationale == "weak recovery"

    def test_conditions_none_is_empty(self):
        _, _, conditions = parse_prediction("1\nREASONING: fine\nCONDITIONS: None")
        assert conditions == ""

    def test_digit_inside_number_not_a_label(self):
        label, _, _ = parse_prediction(
            "Under Section 302 the charge is grave; still, 1\nREASONING: parity")
        assert label == 1

    def test_accepts_generation_result(self):
        result = GenerationResult(text="1\nREASONING: ok")
        assert parse_prediction(result)[0] == 1


@pytest.fixture(scope="module")
def index():
    return ingest_statutes(STATUTE_DIR)


class TestPredictionPrompt:
    def test_no_context_no_statute_bodies(self, index):
        record = make_record()
        prompt = build_prediction_prompt(record, None)
        assert "STATUTORY CONTEXT" not in prompt
        assert "Whoever cheats" not in prompt  # IPC 420 body text

    def test_context_embeds_section_bodies(self, index):
        record = make_record()  # cites 420 and 34 IPC
        from bailpred.statutes import assemble_context
        context = assemble_context(list(record.statutes), index, 2048)
        prompt = build_prediction_prompt(record, context)
        assert "Whoever cheats" in prompt
        assert "common intention" in prompt

    def test_narrative_fields_present(self):
        record = make_record(age=51, health_issues="fractured arm")
        prompt = build_prediction_prompt(record)
        assert "Applicant applied for Regular-Bail." in prompt
        assert "Age of the accused is 51." in prompt
        assert "fractured arm" in prompt
        assert "Section 420 IPC" in prompt
        assert record.incident_details in prompt
        assert record.arguments_supporting in prompt
        assert record.arguments_opposing in prompt

    def test_gold_never_leaks(self, index):
        from bailpred.statutes import assemble_context
        for record in build_corpus_12():
            for context in (None, assemble_context(list(record.statutes), index, 2048)):
                prompt = build_prediction_prompt(record, context)
                assert not prompt_leaks_gold(record, prompt)
                assert record.reasoning not in prompt
                if record.bail_conditions:
                    assert record.bail_conditions not in prompt

    def test_s1_vs_s2_diff_is_exactly_the_context_block(self, index):
        from bailpred.experiments import _PROMPT_DIRECTIVE
        from bailpred.statutes import assemble_context
        record = make_record()
        context = assemble_context(list(record.statutes), index, 2048)
        s1 = build_prediction_prompt(record, None)
        s2 = build_prediction_prompt(record, context)
        context_part = "STATUTORY CONTEXT:\n" + context.render()
        assert s2 == s1.replace(_PROMPT_DIRECTIVE,
                                context_part + "\n\n" + _PROMPT_DIRECTIVE)


class TestRunSetup:
    def _three_records(self):
        return [make_record(f"rs-{i}") for i in (3, 1, 2)]

    def test_mock_run_three_predictions(self, index):
        setups = make_setups(MOCK_ROLES)
        result = run_setup(setups[SetupId.S1_VANILLA], self._three_records(), index,
                           Gateway(), context_budget=2048, jobs=2)
        assert len(result.predictions) == 3
        assert result.item_errors == []
        assert not result.failed
        assert [p.case_id for p in result.predictions] == ["rs-1", "rs-2", "rs-3"]
        for p in result.predictions:
            assert p.y_pred in (0, 1)
            assert p.rationale
            assert abs(p.confidence.p0 + p.confidence.p1 - 100.0) < 1e-6

    def test_rerun_byte_identical(self, tmp_path, index):
        setups = make_setups(MOCK_ROLES)
        records = self._three_records()
        for name in ("a", "b"):
            result = run_setup(setups[SetupId.S1_VANILLA], records, index,
                               Gateway(), context_budget=2048, jobs=3)
            write_prediction_set(result.predictions, tmp_path / f"{name}.jsonl")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_context_setups_use_statutes(self, index):
        setups = make_setups(MOCK_ROLES)
        records = [make_record("ctx-1")]
        s4 = render_setup_prompts(setups[SetupId.S4_FT2], records, index, 2048)
        s6 = render_setup_prompts(setups[SetupId.S6_FT2_CTX], records, index, 2048)
        assert "Whoever cheats" not in s4["ctx-1"]
        assert "Whoever cheats" in s6["ctx-1"]

    def test_prompts_identical_across_endpoints(self, index):
        # setups differ only on (endpoint, context policy): same context
        # policy means byte-identical prompts
        setups = make_setups(MOCK_ROLES)
        records = [make_record("ax-1"), make_record("ax-2")]
        s1 = render_setup_prompts(setups[SetupId.S1_VANILLA], records, index, 2048)
        s3 = render_setup_prompts(setups[SetupId.S3_FT1], records, index, 2048)
        s4 = render_setup_prompts(setups[SetupId.S4_FT2], records, index, 2048)
        assert s1 == s3 == s4
        s2 = render_setup_prompts(setups[SetupId.S2_VANILLA_CTX], records, index, 2048)
        s5 = render_setup_prompts(setups[SetupId.S5_FT1_CTX], records, index, 2048)
        s6 = render_setup_prompts(setups[SetupId.S6_FT2_CTX], records, index, 2048)
        assert s2 == s5 == s6

    def test_manifest_contents(self, index):
        setups = make_setups(MOCK_ROLES)
        result = run_setup(setups[SetupId.S6_FT2_CTX], self._three_records(), index,
                           Gateway(), context_budget=2048)
        m = result.manifest
        assert m["setup"] == "S6_FT2Ctx"
        assert m["endpoint"]["id"] == "ft2"
        assert m["with_statute_context"] is True
        assert m["prompt_template_hash"]
        assert m["started_at"] <= m["finished_at"]
        assert m["status"] == "ok"

    def test_failure_threshold(self, index):
        class Broken:
            def generate(self, request):
                raise BackendReplyError("malformed")

        endpoint = EndpointConfig(id="broken", kind="mock")
        gw = Gateway()
        gw.backend_for(endpoint)
        gw._backends["broken"] = Broken()
        setups = make_setups({"base": endpoint, "ft1": endpoint, "ft2": endpoint})
        result = run_setup(setups[SetupId.S1_VANILLA], self._three_records(), index,
                           Gateway() if False else gw, context_budget=2048)
        assert len(result.item_errors) == 3
        assert result.failed
        assert result.predictions == []

    def test_item_errors_do_not_abort(self, index):
        # one record's reply is junk (no digit, no phrases): that item errors,
        # the others succeed
        class SelectiveJunk:
            def generate(self, request):
                if "poison" in request.prompt:
                    return GenerationResult(text="???", decision_logprobs={"0": -1.0, "1": -1.0})
                return GenerationResult(text="1\nREASONING: fine",
                                        decision_logprobs={"0": -2.0, "1": -0.2})

        endpoint = EndpointConfig(id="selective", kind="mock")
        gw = Gateway()
        gw.backend_for(endpoint)
        gw._backends["selective"] = SelectiveJunk()
        records = [make_record("ok-1"), make_record("ok-2"),
                   make_record("bad-3", incident_details="poison pill incident")]
        setups = make_setups({"base": endpoint, "ft1": endpoint, "ft2": endpoint})
        result = run_setup(setups[SetupId.S1_VANILLA], records, index, gw,
                           context_budget=2048, failure_threshold=0.5)
        assert len(result.predictions) == 2
        assert len(result.item_errors) == 1
        assert result.item_errors[0]["case_id"] == "bad-3"
        assert not result.failed
