from __future__ import annotations

import random
from datetime import date, timedelta
from pathlib import Path

import pytest
import yaml

from bailpred.extraction import render_extraction_output
from bailpred.records import BailType, CaseRecord, Outcome, StatuteCitation

DATA_DIR = Path(__file__).parent / "data"
STATUTE_DIR = DATA_DIR / "statutes"


def cite(section: str, act: str) -> StatuteCitation:
    return StatuteCitation(section, act)


def make_record(case_id: str = "case-001", **overrides) -> CaseRecord:
    defaults = dict(
        case_id=case_id,
        court="Bombay",
        bail_type=BailType.REGULAR,
        is_withdrawal=False,
        age=34,
        health_issues=None,
        has_past_record=False,
        statutes=(cite("420", "IPC"), cite("34", "IPC")),
        precedents=(),
        incident_details="the accused cheated the complainant of a sum of five lakh rupees",
        arguments_supporting="the accused has deep roots in the community and will cooperate",
        arguments_opposing="the accused may tamper with evidence and influence witnesses",
        outcome=Outcome.GRANTED,
        bail_conditions="furnish a personal bond of rupees fifty thousand with one surety",
        reasoning="the investigation is complete and continued custody serves no purpose",
        date_of_arrest=date(2020, 1, 10),
        date_of_judgment=date(2020, 4, 19),
    )
    defaults.update(overrides)
    return CaseRecord(**defaults).check()


# Twelve-case fixture used by the end-to-end and leakage tests. Statutes are
# drawn from tests/data/statutes (plus one deliberate miss); the mixes cover
# all three bail types, withdrawn and past-record flags, absent ages/dates.
def build_corpus_12() -> list[CaseRecord]:
    return [
        make_record(
            "HC-0001", court="Bombay", bail_type=BailType.REGULAR, age=34,
            statutes=(cite("420", "IPC"), cite("34", "IPC")),
            incident_details="the accused cheated investors by collecting deposits for a fake housing scheme",
            arguments_supporting="the accused has repaid part of the amount and cooperated with the enquiry",
            arguments_opposing="large public money is involved and more victims keep surfacing",
            outcome=Outcome.GRANTED,
            bail_conditions="deposit the passport and report to the police station every Monday",
            reasoning="the documentary evidence is already seized and custody is no longer necessary",
            date_of_arrest=date(2020, 1, 10), date_of_judgment=date(2020, 4, 19)),
        make_record(
            "HC-0002", court="Bombay", bail_type=BailType.REGULAR, age=27,
            has_past_record=True,
            statutes=(cite("302", "IPC"), cite("34", "IPC")),
            incident_details="the accused allegedly assaulted the deceased with an iron rod during a quarrel",
            arguments_supporting="the role attributed is omnibus and the accused was not the main assailant",
            arguments_opposing="the offence is grave and key eyewitnesses are yet to be examined",
            outcome=Outcome.NOT_GRANTED, bail_conditions=None,
            reasoning="the accused has criminal antecedents and the trial is at a crucial stage",
            date_of_arrest=date(2019, 11, 2), date_of_judgment=date(2020, 2, 1)),
        make_record(
            "HC-0003", court="Bombay", bail_type=BailType.ANTICIPATORY, age=None,
            statutes=(cite("438", "CrPC"), cite("506", "IPC")),
            incident_details="the accused threatened the complainant over repayment of a private loan",
            arguments_supporting="the dispute is essentially civil in nature and no recovery is pending",
            arguments_opposing="custodial interrogation is necessary to trace the promissory notes",
            outcome=Outcome.GRANTED,
            bail_conditions="join the investigation within one week and do not contact the complainant",
            reasoning="no custodial interrogation is warranted for a dispute arising out of accounts",
            date_of_arrest=None, date_of_judgment=date(2021, 6, 15)),
        make_record(
            "HC-0004", court="Bombay", bail_type=BailType.CANCELLATION, age=41,
            statutes=(cite("439", "CrPC"), cite("302", "IPC")),
            incident_details="the respondent on bail allegedly intimidated two prosecution witnesses",
            arguments_supporting="the respondent breached the bail condition prohibiting witness contact",
            arguments_opposing="the alleged threats are vague and no fresh offence is registered",
            outcome=Outcome.CANCELLED, bail_conditions=None,
            reasoning="supervening misconduct after release justifies recalling the concession",
            date_of_arrest=None, date_of_judgment=date(2022, 3, 9)),
        make_record(
            "HC-0005", court="Kerala", bail_type=BailType.ANTICIPATORY, age=52,
            health_issues="chronic diabetes requiring daily insulin",
            statutes=(cite("438", "CrPC"), cite("64", "Abkari Act")),
            incident_details="the accused was found transporting illicit liquor in a goods carrier",
            arguments_supporting="the accused is aged and ailing and the vehicle owner is absconding",
            arguments_opposing="offences under the excise law are rampant in the locality",
            outcome=Outcome.NOT_GRANTED, bail_conditions=None,
            reasoning="the statutory bar applies and no exceptional circumstance is shown",
            date_of_arrest=None, date_of_judgment=date(2021, 9, 30)),
        make_record(
            "HC-0006", court="Kerala", bail_type=BailType.REGULAR, age=23,
            statutes=(cite("379", "IPC"),),
            precedents=("Sanjay Chandra v CBI (2012) 1 SCC 40",),
            incident_details="the accused stole a motorcycle parked outside the railway station",
            arguments_supporting="the property has been recovered and the accused is a first offender",
            arguments_opposing="the accused is part of a gang targeting two wheelers",
            outcome=Outcome.GRANTED,
            bail_conditions="execute a bond of twenty five thousand rupees and appear before the trial court",
            reasoning="recovery is complete and the offence is triable by a magistrate",
            date_of_arrest=date(2021, 2, 14), date_of_judgment=date(2021, 3, 26)),
        make_record(
            "HC-0007", court="Kerala", bail_type=BailType.REGULAR, age=68,
            health_issues="recent cardiac surgery",
            statutes=(cite("420", "IPC"), cite("406", "IPC")),
            incident_details="the accused induced villagers to invest in a chit fund that collapsed",
            arguments_supporting="the accused underwent bypass surgery and requires continuous care",
            arguments_opposing="hundreds of depositors lost their savings",
            outcome=Outcome.GRANTED,
            bail_conditions="surrender the passport and furnish two solvent sureties of one lakh each",
            reasoning="the age and medical condition of the accused tilt the balance towards liberty",
            date_of_arrest=date(2022, 5, 1), date_of_judgment=date(2022, 8, 9)),
        make_record(
            "HC-0008", court="Kerala", bail_type=BailType.CANCELLATION, age=None,
            statutes=(cite("439", "CrPC"),),
            incident_details="the petitioner seeks cancellation alleging the respondent is absconding",
            arguments_supporting="the respondent failed to appear on three consecutive hearing dates",
            arguments_opposing="the absence was due to hospitalization and is explained by records",
            outcome=Outcome.NOT_CANCELLED, bail_conditions=None,
            reasoning="the explanation for non appearance is satisfactory and bona fide",
            date_of_arrest=None, date_of_judgment=None),
        make_record(
            "HC-0009", court="Allahabad", bail_type=BailType.REGULAR, age=31,
            is_withdrawal=True,
            statutes=(cite("498A", "IPC"),),
            incident_details="the accused allegedly harassed his wife over dowry demands",
            arguments_supporting="the parties have arrived at a settlement before the mediation centre",
            arguments_opposing="",
            outcome=Outcome.NOT_GRANTED, bail_conditions=None,
            reasoning="the application is dismissed as withdrawn at the request of counsel",
            date_of_arrest=date(2022, 1, 5), date_of_judgment=date(2022, 1, 20)),
        make_record(
            "HC-0010", court="Allahabad", bail_type=BailType.ANTICIPATORY, age=45,
            has_past_record=True,
            statutes=(cite("25", "Arms Act"), cite("506(1)(b)", "IPC")),
            incident_details="a country made pistol was recovered from the car of the accused",
            arguments_supporting="the recovery is planted and the vehicle was in a workshop that day",
            arguments_opposing="the accused has two prior cases under the excise and arms laws",
            outcome=Outcome.NOT_GRANTED, bail_conditions=None,
            reasoning="prima facie recovery and antecedents disentitle the accused to pre arrest protection",
            date_of_arrest=None, date_of_judgment=date(2023, 4, 2)),
        make_record(
            "HC-0011", court="Allahabad", bail_type=BailType.ANTICIPATORY, age=38,
            statutes=(cite("420", "IPC"), cite("7", "Essential Commodities Act")),
            incident_details="the accused diverted subsidised food grain meant for ration shops",
            arguments_supporting="the accused is a transporter and had no knowledge of the diversion",
            arguments_opposing="the diversion was systematic and spanned several months",
            outcome=Outcome.GRANTED,
            bail_conditions="cooperate with the audit of stock registers and do not leave the district",
            reasoning="the role of the transporter is peripheral and documentary evidence is secured",
            date_of_arrest=None, date_of_judgment=date(2023, 7, 21)),
        make_record(
            "HC-0012", court="Allahabad", bail_type=BailType.ANTICIPATORY, age=None,
            statutes=(cite("20", "NDPS Act"),),
            incident_details="an intermediate quantity of cannabis was seized from a courier parcel",
            arguments_supporting="the parcel was booked under a false name not linked to the accused",
            arguments_opposing="call records connect the accused to the consignor",
            outcome=Outcome.GRANTED,
            bail_conditions="mark attendance before the investigating officer on alternate Fridays",
            reasoning="the quantity is intermediate and the link evidence is yet to be verified",
            date_of_arrest=None, date_of_judgment=date(2023, 10, 5)),
    ]


_RAW_PREAMBLE = """IN THE HIGH COURT OF {court_upper}
{case_id}
ORDER

1. This application arises from the following allegation: {incident}.

2. Counsel for the applicant submits that {supporting}. Per contra, the
prosecution contends that {opposing}.

3. Heard both sides and perused the case diary.

"""


def render_raw_judgment(record: CaseRecord) -> str:
    """A plausible raw judgment text carrying the mock echo block that lets
    the offline backend answer the extraction prompt for this case."""
    body = _RAW_PREAMBLE.format(
        court_upper=record.court.upper(),
        case_id=record.case_id,
        incident=record.incident_details,
        supporting=record.arguments_supporting or "no grounds are pressed",
        opposing=record.arguments_opposing or "the application is not opposed",
    )
    return body + "REASONING-ECHO[" + render_extraction_output(record) + "]\n"


def write_raw_fixture(records: list[CaseRecord], raw_dir: Path) -> None:
    for record in records:
        court_dir = raw_dir / record.court
        court_dir.mkdir(parents=True, exist_ok=True)
        (court_dir / f"{record.case_id}.txt").write_text(
            render_raw_judgment(record), encoding="utf-8")


def write_config(path: Path, *, raw_dir: Path | None = None,
                 corpus_file: Path | None = None,
                 statute_dir: Path | None = STATUTE_DIR,
                 output_dir: Path, geval: bool = True,
                 context_budget: int = 2048, jobs: int = 2,
                 bertscore_baseline: float | None = None,
                 averaging: str = "macro",
                 extra_endpoints: tuple[str, ...] = ()) -> Path:
    endpoints = {role: {"kind": "mock"} for role in
                 ("extraction", "base", "ft1", "ft2", "embedder", "judge",
                  *extra_endpoints)}
    config = {
        "corpus": {},
        "statutes": {},
        "context": {"token_budget": context_budget},
        "extraction": {"raw_token_budget": 8192},
        "endpoints": endpoints,
        "decoding": {"temperature": 0.0, "max_new_tokens": 512},
        "evaluation": {"averaging": averaging, "geval": geval,
                       "bertscore_baseline": bertscore_baseline,
                       "include_withdrawn": False},
        "run": {"output_dir": str(output_dir), "failure_rate_threshold": 0.1, "jobs": jobs},
    }
    if raw_dir is not None:
        config["corpus"]["raw_dir"] = str(raw_dir)
    if corpus_file is not None:
        config["corpus"]["corpus_file"] = str(corpus_file)
    if statute_dir is not None:
        config["statutes"]["source_dir"] = str(statute_dir)
    path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    return path


# Random-but-valid records for round-trip and property tests. Free text is
# drawn from a closed word pool so it can never collide with template stems
# or the "None" sentinel.
_COURT_POOL = ["Bombay", "Kerala", "Allahabad", "Chhattisgarh", "Jharkhand"]
_ACT_POOL = ["IPC", "CrPC", "Arms Act", "Abkari Act", "NDPS Act", "SC/ST Act"]
_SECTION_POOL = ["34", "302", "376", "420", "438", "439", "498A", "506",
                 "506(1)(b)", "294(a)", "41A(b)(ii)", "25", "64", "20"]
_PHRASE_WORDS = ("accused complainant police station vehicle property money dispute "
                 "village shop night morning recovered weapon witness statement "
                 "quarrel injury hospital business partner loan agreement market").split()
_HEALTH_POOL = [None, "chronic asthma", "diabetes and hypertension",
                "recovering from surgery", "partial visual impairment"]
_PRECEDENT_POOL = ["State v Alpha 1998", "Beta v State of Example 2004",
                   "Gamma Trust matter 2011", "Delta v Union 2019"]


def _phrase(rng: random.Random, lo: int = 4, hi: int = 14) -> str:
    return " ".join(rng.choices(_PHRASE_WORDS, k=rng.randint(lo, hi)))


def make_synthetic_record(rng: random.Random, i: int) -> CaseRecord:
    bail_type = rng.choice(list(BailType))
    if bail_type == BailType.CANCELLATION:
        outcome = rng.choice([Outcome.CANCELLED, Outcome.NOT_CANCELLED])
    else:
        outcome = rng.choice([Outcome.GRANTED, Outcome.NOT_GRANTED])
    statutes = []
    for _ in range(rng.randint(1, 4)):
        citation = StatuteCitation(rng.choice(_SECTION_POOL), rng.choice(_ACT_POOL))
        if citation not in statutes:
            statutes.append(citation)
    arrest = judgment = None
    if rng.random() < 0.6:
        arrest = date(2018, 1, 1) + timedelta(days=rng.randint(0, 2000))
        judgment = arrest + timedelta(days=rng.randint(0, 900))
    return CaseRecord(
        case_id=f"syn-{i:04d}",
        court=rng.choice(_COURT_POOL),
        bail_type=bail_type,
        is_withdrawal=rng.random() < 0.05,
        age=rng.randint(12, 90) if rng.random() < 0.5 else None,
        health_issues=rng.choice(_HEALTH_POOL),
        has_past_record=rng.random() < 0.3,
        statutes=tuple(statutes),
        precedents=tuple(rng.sample(_PRECEDENT_POOL, rng.randint(0, 2))),
        incident_details=_phrase(rng),
        arguments_supporting=_phrase(rng) if rng.random() < 0.9 else "",
        arguments_opposing=_phrase(rng) if rng.random() < 0.8 else "",
        outcome=outcome,
        bail_conditions=_phrase(rng, 3, 8) if rng.random() < 0.6 else None,
        reasoning=_phrase(rng),
        date_of_arrest=arrest,
        date_of_judgment=judgment,
    ).check()


@pytest.fixture()
def corpus12() -> list[CaseRecord]:
    return build_corpus_12()


@pytest.fixture()
def mock_embedder():
    from bailpred.gateway import MockBackend

    backend = MockBackend()
    return backend.embed
