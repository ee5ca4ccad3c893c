//! Regenerates the bundled fixture: a 300-case synthetic corpus, the seeded
//! default-plan sample, a replay cache holding one response per sampled case, the
//! parsed records and one quality-check annotation per sampled case.
//!
//! ```text
//! cargo run -p uket-core --example build_fixture -- fixtures/uket
//! ```
//!
//! Output is deterministic; rerunning over an existing directory rewrites it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uket_core::corpus::{sample, Bucket, CaseDocument, CaseMeta, Corpus, SamplePlan};
use uket_core::extraction::{load_records, AbsenceMarkers, OutcomeLabel};
use uket_core::llm_gateway::{
    CacheEntryMeta, Gateway, GatewayConfig, Mode, OfflineTransport, RateCard, ReplayCache,
};
use uket_core::pipeline::{run_extract, ExtractJob};
use uket_core::prompting::{build_request, ModelConfig, PromptRegistry, TemplateRef};
use uket_core::quality_check::{AnnotationStore, QualityAnnotation};
use uket_core::Aspect;

const GENERATOR_SEED: u64 = 0x5eed_0c0d;
const FIRST_SAMPLE_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 300;
const EXAMPLE_ONE: &str = "3328920/2017";
const EXAMPLE_TWO: &str = "2301070/2018";
const ANNOTATOR: &str = "expert-1";

/// Extra unsampled cases per bucket on top of the plan targets.
const EXTRAS: [(Bucket, usize); 8] = [
    (Bucket::Pages(1), 20),
    (Bucket::Pages(2), 8),
    (Bucket::Pages(3), 3),
    (Bucket::Pages(4), 2),
    (Bucket::Pages(5), 1),
    (Bucket::Pages(6), 1),
    (Bucket::Pages(14), 2),
    (Bucket::Over20, 3),
];

const EXAMPLE_ONE_RESPONSE: &str = "- Facts of the case:** The case involves Mr Y Mfunda (Claimant) and Swaay Child and Adolescent Services Limited (Respondent). The Respondent failed to present a response to the claim. The Claimant was owed wages and claimed for unauthorised deduction from wages and breach of contract related to mileage expenses.
- Claims made in the specific court decision:** The Claimant claimed for unauthorised deduction from wages and breach of contract related to mileage expenses.
- References to legal statutes, acts, regulations, provisions and rules:** The case refers to Rule 21 of Schedule 1 to the Employment Tribunals (Constitution and Rules of Procedure) Regulations 2013.
- References to precedents and other court decisions:** There are no references to precedents or other court decisions in the provided text.
- General case outcome:** The Respondent was ordered to pay the Claimant £6,690.75 (gross) in compensation for the unauthorised deduction from wages. The claim for breach of contract related to mileage expenses was dismissed as the Claimant is still employed and does not have the right to bring a claim for breach of contract.
- General case outcome summarised:** Claimant partly wins.
- Detailed order and remedies:** The Respondent is ordered to pay the Claimant £6,690.75 (gross) in compensation for the unauthorised deduction from wages. The hearing listed for 14 May 2018 is cancelled.
- Essential reasons for the decision:** The Respondent failed to present a response to the claim. The Claimant was found to be owed wages, hence the award for unauthorised deduction from wages. The claim for breach of contract was dismissed as the Claimant is still employed and does not have the right to bring a claim for breach of contract.
";

const EXAMPLE_TWO_RESPONSE: &str = "1. Facts of the case: The claimant, Mr A Martin, is a teacher employed by Southwark Council and the Governing Body of Evangelina Hospital School. He alleges that he was required to work more than the statutory limit of 1265 directed hours per academic year without additional pay, amounting to unauthorised deductions from his wages. He also alleges that he made protected disclosures about this issue, which led to detrimental treatment.

2. Claims made in the case: The claimant made two main claims. Firstly, he claimed for unauthorised deductions from wages due to being required to work beyond the statutory limit of directed hours without additional pay. Secondly, he claimed that he suffered detrimental treatment as a result of making protected disclosures about this issue.

3. References to legal statutes, acts, regulations, provisions and rules: The case refers to the Employment Rights Act 1996, specifically section 13 relating to unauthorised deductions from wages. It also refers to the School Teachers' Pay and Conditions Act 1991 and the Employment Tribunals (Constitution and Rules of Procedure) Regulations 2013, particularly rules 2, 37 and 39.

4. References to precedents and other court decisions: The case of Agarwal v Cardiff University is mentioned, which confirmed that a Tribunal may determine the construction of a contract of employment in an unauthorised deduction from wages claim. The case of Chesterton Global v Nurmohamed is also referred to in relation to whether the disclosures made were in the public interest.

5. General case outcome: The Tribunal struck out the claimant's claim for unauthorised deductions from wages, finding that it had no reasonable prospect of success. The claimant's protected disclosure claim was partly struck out, with one alleged disclosure having no reasonable prospect of success. The Tribunal refused the respondents' applications for a strike out or deposit order on other grounds. The claimant's application to add two additional respondents was also refused.

6. General case outcome summarised using one of the following four labels: 'Claimant partly wins'.

7. Detailed order and remedies: The Tribunal did not order any remedies as it struck out the claimant's claim for unauthorised deductions from wages and partly struck out his protected disclosure claim. The Tribunal also refused the respondents' applications for a strike out or deposit order on other grounds and the claimant's application to add two additional respondents.

8. Essential reasons for the decision: The Tribunal found that the claimant had no legal entitlement to pay for directed hours worked over the statutory limit of 1265 per year, and therefore his claim for unauthorised deductions from wages had no reasonable prospect of success. The Tribunal also found that one of the claimant's alleged protected disclosures had no reasonable prospect of success as it was a disclosure to a third party that no one from the respondents saw. The Tribunal refused the respondents' applications for a strike out or deposit order on other grounds and the claimant's application to add two additional respondents, finding that the balance of prejudice tipped in favour of the respondents.
";

// ---------------------------------------------------------------------------
// Vocabulary

const FIRST_INITIALS: [&str; 20] = [
    "A", "B", "C", "D", "E", "F", "G", "H", "J", "K", "L", "M", "N", "P", "R", "S", "T", "V", "W",
    "Z",
];
const TITLES: [&str; 4] = ["Mr", "Ms", "Mrs", "Miss"];
const SURNAMES: [&str; 40] = [
    "Adeyemi",
    "Bailey",
    "Bennett",
    "Brennan",
    "Chowdhury",
    "Clarke",
    "Costa",
    "Dawson",
    "Edwards",
    "Farrell",
    "Fletcher",
    "Gallagher",
    "Gill",
    "Hamilton",
    "Hussain",
    "Iqbal",
    "Jenkins",
    "Kaur",
    "Kowalski",
    "Lewis",
    "Lloyd",
    "MacLeod",
    "Marsh",
    "Nowak",
    "Okafor",
    "Osei",
    "Patel",
    "Price",
    "Quinn",
    "Rahman",
    "Reid",
    "Sandhu",
    "Shaw",
    "Stewart",
    "Taylor",
    "Thornton",
    "Vaughan",
    "Walsh",
    "Whitfield",
    "Young",
];
const RESPONDENTS: [&str; 32] = [
    "Abbeyfield Logistics Ltd",
    "Brightwater Care Homes Ltd",
    "Castlegate Retail Ltd",
    "Deansgate Security Services Ltd",
    "Eastbrook Construction Ltd",
    "Fairmile Hotels Ltd",
    "Greenhill Nurseries Ltd",
    "Harbourside Catering Ltd",
    "Ironbridge Engineering Ltd",
    "Juniper Recruitment Ltd",
    "Kingsway Motors Ltd",
    "Lakeland Cleaning Services Ltd",
    "Meadowbank Dental Practice",
    "Northgate Freight Ltd",
    "Oakwood Academy Trust",
    "Parkside Pharmacy Ltd",
    "Queensferry Bakery Ltd",
    "Riverside Print Ltd",
    "Stonebridge Facilities Ltd",
    "Thamesmead Couriers Ltd",
    "Upton Garden Centre Ltd",
    "Valley Fresh Foods Ltd",
    "Westfield Healthcare Ltd",
    "Yardley Timber Ltd",
    "Ashcombe Estates Ltd",
    "Beacon Telecoms Ltd",
    "Cedar Lodge Nursing Home Ltd",
    "Dunmore Haulage Ltd",
    "Elmstead Leisure Ltd",
    "Foxton Packaging Ltd",
    "Granary Restaurants Ltd",
    "Highcross Property Management Ltd",
];
const VENUES: [&str; 14] = [
    "London Central",
    "London South",
    "London East",
    "Watford",
    "Reading",
    "Bristol",
    "Cardiff",
    "Birmingham",
    "Nottingham",
    "Leeds",
    "Manchester",
    "Newcastle",
    "Glasgow",
    "Cambridge",
];
const JUDGES: [&str; 16] = [
    "Employment Judge Ahmed",
    "Employment Judge Barrett",
    "Employment Judge Carroll",
    "Employment Judge Dyal",
    "Employment Judge Elliott",
    "Employment Judge Forde",
    "Employment Judge Grewal",
    "Employment Judge Harding",
    "Employment Judge Ibbotson",
    "Employment Judge Jones",
    "Employment Judge Khan",
    "Employment Judge Lancaster",
    "Employment Judge Moore",
    "Employment Judge Nash",
    "Employment Judge Owen",
    "Employment Judge Pirani",
];
const JOBS: [&str; 16] = [
    "warehouse operative",
    "care assistant",
    "sales assistant",
    "security officer",
    "site labourer",
    "receptionist",
    "nursery practitioner",
    "chef",
    "maintenance engineer",
    "recruitment consultant",
    "vehicle technician",
    "cleaner",
    "dental nurse",
    "HGV driver",
    "teaching assistant",
    "pharmacy dispenser",
];
const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const OFFICE_CODES: [u32; 12] = [13, 14, 16, 18, 22, 23, 24, 25, 26, 32, 33, 41];

struct ClaimKind {
    name: &'static str,
    statute: &'static str,
    code: &'static str,
    fact: &'static str,
    reason: &'static str,
}

const CLAIMS: [ClaimKind; 8] = [
    ClaimKind {
        name: "unfair dismissal",
        statute: "sections 94 and 98 of the Employment Rights Act 1996",
        code: "UDL",
        fact: "The claimant was dismissed after a disciplinary hearing about an alleged breach of the respondent's procedures",
        reason: "The respondent had not carried out a reasonable investigation before deciding to dismiss",
    },
    ClaimKind {
        name: "unauthorised deduction from wages",
        statute: "section 13 of the Employment Rights Act 1996",
        code: "WTA",
        fact: "The respondent stopped paying the claimant for overtime shifts that had been worked",
        reason: "The sums withheld were properly payable and no written agreement permitted the deduction",
    },
    ClaimKind {
        name: "holiday pay",
        statute: "regulations 14 and 30 of the Working Time Regulations 1998",
        code: "WTR",
        fact: "Accrued but untaken annual leave was not paid when the employment ended",
        reason: "Leave had accrued in the final leave year and no payment in lieu was made on termination",
    },
    ClaimKind {
        name: "breach of contract in respect of notice pay",
        statute: "the Employment Tribunals Extension of Jurisdiction (England and Wales) Order 1994",
        code: "BOC",
        fact: "The claimant was dismissed without notice and without any payment in lieu of notice",
        reason: "No gross misconduct was established that would have entitled the respondent to dismiss summarily",
    },
    ClaimKind {
        name: "disability discrimination",
        statute: "sections 15 and 20 of the Equality Act 2010",
        code: "DDA",
        fact: "The claimant asked for a phased return to work following a period of sickness absence",
        reason: "A phased return was a reasonable adjustment that the respondent failed to make",
    },
    ClaimKind {
        name: "sex discrimination",
        statute: "section 13 of the Equality Act 2010",
        code: "SXD",
        fact: "The claimant was not offered a supervisory role that was given to a male colleague with less experience",
        reason: "The comparator was treated more favourably and the respondent gave no adequate non-discriminatory explanation",
    },
    ClaimKind {
        name: "a statutory redundancy payment",
        statute: "section 135 of the Employment Rights Act 1996",
        code: "RPT",
        fact: "The respondent closed the branch where the claimant had worked for several years",
        reason: "The dismissal was by reason of redundancy and the qualifying service requirement was met",
    },
    ClaimKind {
        name: "detriment for making protected disclosures",
        statute: "sections 43B and 47B of the Employment Rights Act 1996",
        code: "PID",
        fact: "The claimant reported unsafe lifting equipment to the operations director",
        reason: "The report tended to show a danger to health and safety and was made in the reasonable belief that it was in the public interest",
    },
];

const PRECEDENTS: [&str; 10] = [
    "Polkey v AE Dayton Services Ltd [1987] UKHL 8",
    "British Home Stores Ltd v Burchell [1980] ICR 303",
    "Iceland Frozen Foods Ltd v Jones [1983] ICR 17",
    "Western Excavating (ECC) Ltd v Sharp [1978] ICR 221",
    "Igen Ltd v Wong [2005] EWCA Civ 142",
    "Madarassy v Nomura International plc [2007] EWCA Civ 33",
    "Sainsbury's Supermarkets Ltd v Hitt [2003] IRLR 23",
    "Bear Scotland Ltd v Fulton [2015] ICR 221",
    "Environment Agency v Rowan [2008] ICR 218",
    "Cavendish Munro Professional Risks Management Ltd v Geduld [2010] ICR 325",
];

const NO_PRECEDENTS: &str =
    "There are no references to precedents or other court decisions in the provided text.";

const BOILERPLATE: [&str; 12] = [
    "The Tribunal had before it an agreed bundle of documents and written witness statements, which were taken as read.",
    "Both parties were given the opportunity to ask questions of the witnesses and to make closing submissions.",
    "The Employment Judge explained the procedure at the outset and checked that the parties understood the issues to be determined.",
    "Written reasons will not be provided unless a request is made by either party within fourteen days of the date on which this judgment is sent.",
    "The hearing was conducted by video and no party raised any difficulty with the technology or the quality of the connection.",
    "The Tribunal made its findings on the balance of probabilities, having regard to the documents and the oral evidence.",
    "The list of issues was agreed at a preliminary hearing and was not amended at the final hearing.",
    "The Tribunal took account of the overriding objective of dealing with cases fairly and justly.",
    "Where the evidence conflicted, the Tribunal preferred the account that was consistent with the contemporaneous documents.",
    "The parties were reminded that any application for reconsideration must be made within the time limit in the rules.",
    "The Tribunal is grateful to both representatives for their helpful and focused submissions.",
    "Any sums awarded are subject to the deduction of tax and national insurance where applicable.",
];

// ---------------------------------------------------------------------------
// Case plans

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Substantive,
    Contributory,
    DefaultJudgment,
    Withdrawal,
    Settlement,
    StrikeOut,
    NoFacts,
    MultiClaimant,
    ExampleOne,
    ExampleTwo,
}

/// Where "Rule 21" appears in a default-judgment record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum R21 {
    No,
    FactsStatutesReasons,
    StatutesOnly,
    StatutesReasons,
}

#[derive(Debug, Clone)]
struct Plan {
    kind: Kind,
    label: OutcomeLabel,
    r21: R21,
    suitable: bool,
    procedural: bool,
    fails: Vec<Aspect>,
}

impl Plan {
    fn new(kind: Kind, label: OutcomeLabel, suitable: bool, procedural: bool) -> Self {
        Self {
            kind,
            label,
            r21: R21::No,
            suitable,
            procedural,
            fails: Vec::new(),
        }
    }

    fn failing(mut self, aspects: &[Aspect]) -> Self {
        self.fails.extend_from_slice(aspects);
        self
    }

    fn rule21(mut self, r21: R21) -> Self {
        self.r21 = r21;
        self
    }
}

fn repeat(n: usize, plan: Plan) -> Vec<Plan> {
    vec![plan; n]
}

fn substantive(rng: &mut ChaCha8Rng, suitable: bool) -> Plan {
    let label = *[
        OutcomeLabel::ClaimantWins,
        OutcomeLabel::ClaimantWins,
        OutcomeLabel::ClaimantPartlyWins,
        OutcomeLabel::ClaimantLoses,
    ]
    .choose(rng)
    .unwrap();
    Plan::new(Kind::Substantive, label, suitable, false)
}

/// Plans for the four (page class, suitability) groups of the sample.
struct Groups {
    one_page_suitable: Vec<Plan>,
    one_page_unsuitable: Vec<Plan>,
    multi_page_suitable: Vec<Plan>,
    multi_page_unsuitable: Vec<Plan>,
}

fn group_plans(rng: &mut ChaCha8Rng) -> Groups {
    use Aspect as A;
    use OutcomeLabel as L;
    let wd_other =
        |s: bool| Plan::new(Kind::Withdrawal, L::Other, s, s).failing(&[A::OutcomeLabel]);
    let wd_loses = |s: bool| Plan::new(Kind::Withdrawal, L::ClaimantLoses, s, s);
    let strike = |s: bool| Plan::new(Kind::StrikeOut, L::ClaimantLoses, s, s);
    let dj = |s: bool, r| Plan::new(Kind::DefaultJudgment, L::ClaimantWins, s, s).rule21(r);
    let no_facts = |l| Plan::new(Kind::NoFacts, l, false, false);

    let mut mps = vec![
        Plan::new(Kind::ExampleTwo, L::ClaimantPartlyWins, true, false),
        Plan::new(Kind::MultiClaimant, L::ClaimantPartlyWins, true, false)
            .failing(&[A::GeneralOutcome, A::OrderRemedies]),
        Plan::new(Kind::Contributory, L::ClaimantWins, true, false).failing(&[A::OutcomeLabel]),
    ];
    mps.extend(repeat(2, wd_other(true)));
    mps.extend(repeat(3, wd_loses(true)));
    mps.extend(repeat(4, strike(true)));
    mps.extend(repeat(5, dj(true, R21::FactsStatutesReasons)));
    mps.extend(repeat(4, dj(true, R21::StatutesReasons)));
    mps.extend(repeat(2, dj(true, R21::StatutesOnly)));
    for (n, aspect) in [(6, A::Facts), (2, A::Claims), (1, A::Reasons)] {
        for _ in 0..n {
            mps.push(substantive(rng, true).failing(&[aspect]));
        }
    }
    while mps.len() < 85 {
        mps.push(substantive(rng, true));
    }

    let mut ops = vec![
        Plan::new(Kind::Contributory, L::ClaimantWins, true, false).failing(&[A::OutcomeLabel])
    ];
    ops.extend(repeat(2, wd_other(true)));
    ops.extend(repeat(3, wd_loses(true)));
    ops.extend(repeat(2, strike(true)));
    ops.extend(repeat(2, dj(true, R21::FactsStatutesReasons)));
    ops.extend(repeat(1, dj(true, R21::StatutesReasons)));
    for (n, aspect) in [(4, A::Facts), (1, A::Claims)] {
        for _ in 0..n {
            ops.push(substantive(rng, true).failing(&[aspect]));
        }
    }
    while ops.len() < 39 {
        ops.push(substantive(rng, true));
    }

    let mut mpu = vec![
        no_facts(L::ClaimantWins).failing(&[A::OutcomeLabel]),
        no_facts(L::ClaimantLoses).failing(&[A::Facts]),
    ];
    mpu.extend(repeat(2, wd_other(false)));
    mpu.extend(repeat(2, wd_loses(false)));
    mpu.extend(repeat(
        2,
        Plan::new(Kind::Settlement, L::Other, false, false),
    ));
    for i in 0..4 {
        mpu.push(no_facts(if i % 2 == 0 {
            L::ClaimantWins
        } else {
            L::ClaimantLoses
        }));
    }

    let mut opu = vec![
        Plan::new(Kind::ExampleOne, L::ClaimantPartlyWins, false, false).rule21(R21::StatutesOnly),
    ];
    opu.extend(repeat(10, wd_other(false)));
    opu.extend(repeat(20, wd_loses(false)));
    opu.extend(repeat(12, strike(false)));
    opu.extend(repeat(
        10,
        Plan::new(Kind::Settlement, L::Other, false, false),
    ));
    opu.extend(repeat(2, dj(false, R21::FactsStatutesReasons)));
    opu.extend(repeat(2, dj(false, R21::StatutesReasons)));
    opu.extend(repeat(7, dj(false, R21::StatutesOnly)));
    for i in 0..4 {
        opu.push(
            no_facts(if i % 2 == 0 {
                L::ClaimantPartlyWins
            } else {
                L::ClaimantWins
            })
            .failing(&[A::OutcomeLabel]),
        );
        opu.push(no_facts(L::ClaimantWins).failing(&[A::Facts]));
    }
    opu.extend(repeat(2, no_facts(L::ClaimantLoses).failing(&[A::Claims])));
    let labels = [
        L::ClaimantWins,
        L::ClaimantWins,
        L::ClaimantLoses,
        L::ClaimantPartlyWins,
    ];
    while opu.len() < 124 {
        opu.push(no_facts(*labels.choose(rng).unwrap()));
    }

    Groups {
        one_page_suitable: ops,
        one_page_unsuitable: opu,
        multi_page_suitable: mps,
        multi_page_unsuitable: mpu,
    }
}

// ---------------------------------------------------------------------------
// Case identities

#[derive(Debug, Clone)]
struct Parties {
    claimant: String,
    claimant_surname: String,
    respondent: String,
    venue: &'static str,
    judge: &'static str,
    job: &'static str,
    year: u32,
    hearing: String,
    claims: Vec<usize>,
    amount: String,
    precedents: Vec<&'static str>,
}

impl Parties {
    fn short_name(&self) -> String {
        let title = self.claimant.split(' ').next().unwrap_or("Mr");
        format!("{title} {}", self.claimant_surname)
    }
}

fn money(rng: &mut ChaCha8Rng) -> String {
    let pence: u32 = rng.random_range(25_000..1_800_000);
    let pounds = pence / 100;
    let grouped = if pounds >= 1000 {
        format!("{},{:03}", pounds / 1000, pounds % 1000)
    } else {
        pounds.to_string()
    };
    format!("£{grouped}.{:02}", pence % 100)
}

fn parties(rng: &mut ChaCha8Rng, year: u32) -> Parties {
    let surname = *SURNAMES.choose(rng).unwrap();
    let claimant = format!(
        "{} {} {}",
        TITLES.choose(rng).unwrap(),
        FIRST_INITIALS.choose(rng).unwrap(),
        surname
    );
    let n_claims = rng.random_range(2..=3);
    let mut claims: Vec<usize> = (0..CLAIMS.len()).collect();
    claims.shuffle(rng);
    claims.truncate(n_claims);
    let n_prec = *[0usize, 0, 1, 2].choose(rng).unwrap();
    let mut precedents: Vec<&str> = PRECEDENTS.to_vec();
    precedents.shuffle(rng);
    precedents.truncate(n_prec);
    Parties {
        claimant,
        claimant_surname: surname.to_string(),
        respondent: RESPONDENTS.choose(rng).unwrap().to_string(),
        venue: VENUES.choose(rng).unwrap(),
        judge: JUDGES.choose(rng).unwrap(),
        job: JOBS.choose(rng).unwrap(),
        year,
        hearing: format!(
            "{} {} {}",
            rng.random_range(1..=28),
            MONTHS.choose(rng).unwrap(),
            year
        ),
        claims,
        amount: money(rng),
        precedents,
    }
}

fn claim_list(p: &Parties) -> String {
    let names: Vec<&str> = p.claims.iter().map(|&i| CLAIMS[i].name).collect();
    match names.as_slice() {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

fn statute_list(p: &Parties) -> String {
    let names: Vec<&str> = p.claims.iter().map(|&i| CLAIMS[i].statute).collect();
    match names.as_slice() {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

// ---------------------------------------------------------------------------
// Responses

/// The eight section bodies in prompt order.
type Sections = [String; 8];

fn label_text(label: OutcomeLabel, style: usize) -> String {
    let base = match label {
        OutcomeLabel::ClaimantWins => "Claimant wins",
        OutcomeLabel::ClaimantPartlyWins => {
            if style == 5 {
                "Claimant partially wins"
            } else {
                "Claimant partly wins"
            }
        }
        OutcomeLabel::ClaimantLoses => "Claimant loses",
        OutcomeLabel::Other => "Other",
    };
    match style {
        0 | 5 => format!("{base}."),
        1 => format!("'{base}'."),
        2 => base.to_string(),
        3 => format!("\u{2018}{base}\u{2019}."),
        _ => format!("{base}."),
    }
}

fn sections(plan: &Plan, p: &Parties, rng: &mut ChaCha8Rng) -> Sections {
    let c = &p.claimant;
    let r = &p.respondent;
    let first = &CLAIMS[p.claims[0]];
    let second = &CLAIMS[p.claims[1]];
    let label = label_text(plan.label, rng.random_range(0..6));
    let fails = |a: Aspect| plan.fails.contains(&a);
    let prec = if p.precedents.is_empty() {
        NO_PRECEDENTS.to_string()
    } else {
        format!("The Tribunal referred to {}.", p.precedents.join(" and "))
    };

    match plan.kind {
        Kind::Substantive | Kind::Contributory => {
            let facts = if fails(Aspect::Facts) {
                format!(
                    "The case involves {c} (claimant) and {r} (respondent). The hearing took place at the {} Employment Tribunal on {}.",
                    p.venue, p.hearing
                )
            } else {
                let events: Vec<String> = p.claims.iter().map(|&i| format!("{}.", CLAIMS[i].fact)).collect();
                format!(
                    "{c} was employed by {r} as a {} until {}. {}",
                    p.job,
                    p.year,
                    events.join(" ")
                )
            };
            let claims = if fails(Aspect::Claims) {
                format!("The claimant brought a claim of {} against the respondent.", first.name)
            } else {
                format!("The claimant brought claims of {}.", claim_list(p))
            };
            let statutes = format!("The case refers to {}.", statute_list(p));
            let (general, order) = match (plan.kind, plan.label) {
                (Kind::Contributory, _) => (
                    format!(
                        "The claim of {} succeeded, but the compensatory award was reduced by {}% because the claimant contributed to the dismissal.",
                        first.name,
                        [25, 30, 50].choose(rng).unwrap()
                    ),
                    format!("The respondent shall pay the claimant {} after the reduction for contributory conduct.", p.amount),
                ),
                (_, OutcomeLabel::ClaimantWins) => (
                    format!("All of the claimant's complaints, namely {}, were well founded.", claim_list(p)),
                    format!("The respondent is ordered to pay the claimant {}.", p.amount),
                ),
                (_, OutcomeLabel::ClaimantPartlyWins) => (
                    format!(
                        "The complaint of {} succeeded and the complaint of {} was dismissed.",
                        first.name, second.name
                    ),
                    format!("The respondent is ordered to pay the claimant {} in respect of the successful complaint.", p.amount),
                ),
                _ => (
                    format!("The Tribunal dismissed the complaints of {}.", claim_list(p)),
                    "No remedy was ordered because every complaint was dismissed.".to_string(),
                ),
            };
            let reasons = if fails(Aspect::Reasons) {
                "The Tribunal found the witnesses for both sides to be broadly credible on most matters.".to_string()
            } else if plan.label == OutcomeLabel::ClaimantLoses {
                format!(
                    "The Tribunal was not satisfied on the evidence that {} made out the complaints, and accepted the respondent's explanation for each decision.",
                    p.short_name()
                )
            } else {
                let mut rs = vec![format!("{}.", first.reason)];
                if plan.label == OutcomeLabel::ClaimantPartlyWins {
                    rs.push(format!("The complaint of {} failed on the evidence heard.", second.name));
                } else if plan.kind == Kind::Substantive {
                    rs.push(format!("{}.", second.reason));
                }
                rs.join(" ")
            };
            [facts, claims, statutes, prec, general, label, order, reasons]
        }
        Kind::DefaultJudgment => {
            let r21_facts = plan.r21 == R21::FactsStatutesReasons;
            let r21_reasons = matches!(plan.r21, R21::FactsStatutesReasons | R21::StatutesReasons);
            let mut facts = format!(
                "{c} worked for {r} as a {}. The respondent did not pay the claimant for the final weeks of work.",
                p.job
            );
            if r21_facts {
                facts.push_str(" No response to the claim was received, so the claim was considered under Rule 21.");
            }
            let reasons = if r21_reasons {
                "Because the respondent presented no response, the Employment Judge issued judgment under Rule 21 on the information provided by the claimant.".to_string()
            } else {
                "The respondent presented no response, and the documents supplied by the claimant supported the sum claimed.".to_string()
            };
            [
                facts,
                "The claimant claimed unauthorised deduction from wages.".to_string(),
                "The case refers to section 13 of the Employment Rights Act 1996 and Rule 21 of the Employment Tribunals Rules of Procedure 2013.".to_string(),
                NO_PRECEDENTS.to_string(),
                "Judgment was given for the claimant on the complaint of unauthorised deduction from wages.".to_string(),
                label,
                format!("The respondent is ordered to pay the claimant {}.", p.amount),
                reasons,
            ]
        }
        Kind::Withdrawal => [
            format!(
                "{c} brought a claim of {} against {r}. The claimant withdrew the claim before the hearing on {}.",
                first.name, p.hearing
            ),
            format!("The claimant had claimed {}.", first.name),
            "The case refers to rules 51 and 52 of the Employment Tribunals Rules of Procedure 2013.".to_string(),
            NO_PRECEDENTS.to_string(),
            "The claim was dismissed upon withdrawal by the claimant.".to_string(),
            label,
            "The claim is dismissed and no remedy was ordered.".to_string(),
            "Dismissal followed the notice of withdrawal and the claimant did not wish to reserve the right to bring a further claim.".to_string(),
        ],
        Kind::Settlement => [
            format!(
                "{c} brought claims of {} against {r}. The parties reached terms through ACAS shortly before the hearing.",
                claim_list(p)
            ),
            format!("The claimant brought claims of {}.", claim_list(p)),
            "The case refers to rule 29 of the Employment Tribunals Rules of Procedure 2013.".to_string(),
            NO_PRECEDENTS.to_string(),
            "The proceedings were stayed because the parties had settled.".to_string(),
            label,
            "The proceedings are stayed with liberty to apply to restore within six months.".to_string(),
            "The parties informed the Tribunal that a settlement agreement had been concluded.".to_string(),
        ],
        Kind::StrikeOut => [
            format!(
                "{c} brought a claim of {} against {r}. The claimant did not comply with an unless order requiring further particulars by {}.",
                first.name, p.hearing
            ),
            format!("The claimant brought a claim of {}.", first.name),
            "The case refers to rules 37 and 38 of the Employment Tribunals Rules of Procedure 2013.".to_string(),
            NO_PRECEDENTS.to_string(),
            "The claim was struck out for non-compliance with the Tribunal's order.".to_string(),
            label,
            "The claim stands dismissed and no remedy was ordered.".to_string(),
            "The particulars required by the order were never provided and no explanation for the default was offered.".to_string(),
        ],
        Kind::NoFacts => {
            let facts = if fails(Aspect::Facts) {
                "There are no relevant facts to report from the judgment.".to_string()
            } else {
                "The document does not provide details of the facts of the case.".to_string()
            };
            let claims = if fails(Aspect::Claims) {
                format!("The claimant made a claim against the respondent, {r}.")
            } else {
                format!("The claimant brought a claim of {} against {r}.", first.name)
            };
            let (general, order) = match plan.label {
                OutcomeLabel::ClaimantLoses => (
                    format!("The complaint of {} was not well founded and was dismissed.", first.name),
                    "No remedy was ordered.".to_string(),
                ),
                OutcomeLabel::ClaimantPartlyWins => (
                    format!("The complaint of {} succeeded in part.", first.name),
                    format!("The respondent shall pay the claimant {}.", p.amount),
                ),
                _ => (
                    format!("The complaint of {} was well founded.", first.name),
                    format!("The respondent shall pay the claimant {}.", p.amount),
                ),
            };
            [
                facts,
                claims,
                format!("The case refers to {}.", first.statute),
                NO_PRECEDENTS.to_string(),
                general,
                label,
                order,
                "The document does not provide the reasons for the decision.".to_string(),
            ]
        }
        Kind::MultiClaimant => [
            format!(
                "Fourteen claimants, including {c}, were employed by {r} at its distribution site until it closed in {}.",
                p.year
            ),
            "Each claimant claimed a protective award for failure to consult and unauthorised deduction from wages.".to_string(),
            "The case refers to section 189 of the Trade Union and Labour Relations (Consolidation) Act 1992 and section 13 of the Employment Rights Act 1996.".to_string(),
            NO_PRECEDENTS.to_string(),
            format!(
                "For {c}, the claim for a protective award succeeded and the deduction claim was dismissed. The outcomes for the other claimants can be similarly organised."
            ),
            label,
            format!(
                "The respondent is ordered to pay {c} a protective award of 90 days' pay. The orders for the remaining claimants can be similarly organised."
            ),
            "The respondent proposed to dismiss more than twenty employees at one establishment and did not consult any representatives.".to_string(),
        ],
        Kind::ExampleOne | Kind::ExampleTwo => unreachable!("published responses are verbatim"),
    }
}

const NUMBERED_HEADINGS: [[&str; 2]; 8] = [
    ["Facts of the case", "Facts of the case"],
    ["Claims made in the specific court decision", "Claims made"],
    [
        "References to legal statutes, acts, regulations, provisions and rules",
        "References to legal statutes",
    ],
    [
        "References to precedents and other court decisions",
        "References to precedents",
    ],
    ["General case outcome", "General case outcome"],
    [
        "General case outcome summarised using one of the following four labels",
        "General case outcome summarised",
    ],
    ["Detailed order and remedies", "Detailed order and remedies"],
    [
        "Essential reasons for the decision (procedural and substantive)",
        "Essential reasons for the decision",
    ],
];

fn render(sections: &Sections, dialect: usize) -> String {
    let mut out = String::new();
    for (i, body) in sections.iter().enumerate() {
        let heading = NUMBERED_HEADINGS[i][dialect % 2];
        match dialect {
            0 | 1 => {
                out.push_str(&format!("{}. {heading}: {body}\n", i + 1));
                if dialect == 0 {
                    out.push('\n');
                }
            }
            _ => out.push_str(&format!("- {heading}:** {body}\n")),
        }
    }
    out.trim_end().to_string() + "\n"
}

// ---------------------------------------------------------------------------
// Judgment bodies

fn judgment_body(
    case_id: &str,
    plan: Option<&Plan>,
    p: &Parties,
    rng: &mut ChaCha8Rng,
    target_chars: usize,
) -> String {
    let mut body = format!(
        "EMPLOYMENT TRIBUNALS\n\nClaimant: {}\nRespondent: {}\n\nHeard at: {}    On: {}\nBefore: {}\n\nCase number: {case_id}\n\nJUDGMENT\n\n",
        p.claimant, p.respondent, p.venue, p.hearing, p.judge
    );
    let kind = plan.map(|pl| pl.kind).unwrap_or(Kind::Substantive);
    let core: Vec<String> = match kind {
        Kind::ExampleOne => vec![
            "The respondent has not presented a response to the claim and the time for doing so has expired. A judgment is issued under Rule 21 of Schedule 1 to the Employment Tribunals (Constitution and Rules of Procedure) Regulations 2013.".into(),
            "The respondent has made an unauthorised deduction from the claimant's wages and is ordered to pay the claimant £6,690.75 gross.".into(),
            "The complaint of breach of contract in respect of mileage expenses is dismissed. The claimant remains employed by the respondent and the tribunal has no jurisdiction to hear a contract claim that does not arise on the termination of employment.".into(),
            "The hearing listed for 14 May 2018 is cancelled.".into(),
        ],
        Kind::ExampleTwo => vec![
            "The claim of unauthorised deductions from wages is struck out because it has no reasonable prospect of success.".into(),
            "The complaint of detriment for making protected disclosures is struck out insofar as it relies on the disclosure made to a third party. The remainder of that complaint will proceed to a final hearing.".into(),
            "The respondents' applications for strike out or for a deposit order on other grounds are refused.".into(),
            "The claimant's application to add two further respondents is refused.".into(),
            "REASONS".into(),
            "The claimant is a teacher at Evangelina Hospital School. His employers are Southwark Council and the school's governing body. He says that over several academic years he was directed to work beyond 1265 hours and was not paid for the excess.".into(),
            "The School Teachers' Pay and Conditions Document made under the School Teachers' Pay and Conditions Act 1991 sets the limit on directed time. It does not create an entitlement to additional pay for directed time beyond the limit. Following Agarwal v Cardiff University the tribunal may construe the contract, but on any construction no sum was properly payable.".into(),
            "As to the disclosures, the tribunal considered Chesterton Global v Nurmohamed on the public interest requirement. One alleged disclosure was made to a person outside the respondents and was never seen by anyone acting for them, so that part of the claim cannot succeed.".into(),
            "Applying rules 2, 37 and 39, and weighing the balance of prejudice, the remaining applications were refused.".into(),
        ],
        Kind::Withdrawal => vec![format!(
            "The claim is dismissed following a withdrawal by the claimant under rule 52. The claimant brought a complaint of {}.",
            CLAIMS[p.claims[0]].name
        )],
        Kind::Settlement => vec![
            "The parties have notified the tribunal that the proceedings have been settled through ACAS. The proceedings are stayed.".into(),
        ],
        Kind::StrikeOut => vec![format!(
            "The claim is struck out under rule 37 because the claimant failed to comply with the unless order sent to the parties before {}.",
            p.hearing
        )],
        Kind::DefaultJudgment => vec![format!(
            "No response has been presented. Judgment is given under Rule 21. The respondent shall pay the claimant {} in respect of unpaid wages.",
            p.amount
        )],
        Kind::MultiClaimant => vec![
            "The claims of the fourteen claimants listed in the schedule were heard together. The respondent closed its distribution site and dismissed all staff without collective consultation.".into(),
            format!("A protective award is made in favour of each claimant, including {}, for a period of 90 days.", p.claimant),
        ],
        _ => {
            let mut v = vec![format!(
                "The claimant was employed by the respondent as a {}. The complaints were of {}.",
                p.job,
                claim_list(p)
            )];
            v.extend(p.claims.iter().map(|&i| format!("{}. {}.", CLAIMS[i].fact, CLAIMS[i].reason)));
            v
        }
    };
    for (i, para) in core.iter().enumerate() {
        body.push_str(&format!("{}. {para}\n\n", i + 1));
    }
    let mut n = core.len();
    while body.chars().count() < target_chars {
        n += 1;
        let para = BOILERPLATE.choose(rng).unwrap();
        body.push_str(&format!("{n}. {para}\n\n"));
    }
    body.push_str(&format!("{}\n\nDate: {}\n", p.judge, p.hearing));
    body
}

// ---------------------------------------------------------------------------

struct Slot {
    case_id: String,
    pages: u32,
    /// Body length range for cases whose page count is left to the estimator.
    estimated: Option<(usize, usize)>,
    year: u32,
}

fn case_id(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>) -> (String, u32) {
    loop {
        let year = rng.random_range(2017..=2022);
        let id = format!(
            "{}{:05}/{year}",
            OFFICE_CODES.choose(rng).unwrap(),
            rng.random_range(0..100_000)
        );
        if taken.insert(id.clone()) {
            return (id, year);
        }
    }
}

fn slots(rng: &mut ChaCha8Rng) -> Vec<Slot> {
    let plan = SamplePlan::table1();
    let extras: BTreeMap<Bucket, usize> = EXTRAS.into_iter().collect();
    let mut taken: BTreeSet<String> = [EXAMPLE_ONE, EXAMPLE_TWO]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut out = vec![
        Slot {
            case_id: EXAMPLE_ONE.into(),
            pages: 1,
            estimated: None,
            year: 2017,
        },
        Slot {
            case_id: EXAMPLE_TWO.into(),
            pages: 4,
            estimated: Some((9_200, 11_800)),
            year: 2018,
        },
    ];
    for stratum in &plan.strata {
        let mut n = stratum.target + extras.get(&stratum.bucket).copied().unwrap_or(0);
        match stratum.bucket {
            Bucket::Pages(1) | Bucket::Pages(4) => n -= 1,
            _ => {}
        }
        for i in 0..n {
            let (id, year) = case_id(rng, &mut taken);
            let (pages, estimated) = match stratum.bucket {
                Bucket::Pages(1) if i < 4 => (1, Some((1_400, 2_800))),
                Bucket::Pages(2) if i < 2 => (2, Some((3_300, 5_800))),
                Bucket::Pages(k) => (k, None),
                Bucket::Over20 => (rng.random_range(21..=64), None),
            };
            out.push(Slot {
                case_id: id,
                pages,
                estimated,
                year,
            });
        }
    }
    assert_eq!(out.len(), CORPUS_SIZE);
    out
}

fn provisional_doc(slot: &Slot) -> CaseDocument {
    match slot.estimated {
        Some((lo, _)) => CaseDocument::new(&slot.case_id, "x".repeat(lo), CaseMeta::default()),
        None => CaseDocument::new(
            &slot.case_id,
            "x",
            CaseMeta {
                page_count: Some(slot.pages),
                ..Default::default()
            },
        ),
    }
    .expect("valid provisional document")
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures/uket"));
    for sub in ["corpus", "cache", "responses", "records", "annotations"] {
        let p = out.join(sub);
        if p.exists() {
            fs::remove_dir_all(&p).expect("clear output directory");
        }
    }
    fs::create_dir_all(&out).expect("create output directory");

    let mut rng = ChaCha8Rng::seed_from_u64(GENERATOR_SEED);
    let slots = slots(&mut rng);

    // Pick the first seed whose draw contains both published cases.
    let provisional: Vec<CaseDocument> = slots.iter().map(provisional_doc).collect();
    let plan = SamplePlan::table1();
    let mut seed = FIRST_SAMPLE_SEED;
    let manifest = loop {
        let m = sample(&provisional, &plan, seed).expect("sample");
        if m.case_ids.iter().any(|c| c == EXAMPLE_ONE)
            && m.case_ids.iter().any(|c| c == EXAMPLE_TWO)
        {
            break m;
        }
        seed += 1;
    };

    // Assign plans to sampled cases by page class.
    let groups = group_plans(&mut rng);
    let pages_of: BTreeMap<&str, u32> = slots
        .iter()
        .map(|s| (s.case_id.as_str(), s.pages))
        .collect();
    let mut one: Vec<&str> = manifest
        .case_ids
        .iter()
        .map(String::as_str)
        .filter(|c| pages_of[c] == 1 && *c != EXAMPLE_ONE)
        .collect();
    let mut multi: Vec<&str> = manifest
        .case_ids
        .iter()
        .map(String::as_str)
        .filter(|c| pages_of[c] > 1 && *c != EXAMPLE_TWO)
        .collect();
    one.shuffle(&mut rng);
    multi.shuffle(&mut rng);
    let mut plans: BTreeMap<String, Plan> = BTreeMap::new();
    let assign = |ids: &mut Vec<&str>, group: Vec<Plan>, plans: &mut BTreeMap<String, Plan>| {
        for p in group {
            let id = match p.kind {
                Kind::ExampleOne => EXAMPLE_ONE,
                Kind::ExampleTwo => EXAMPLE_TWO,
                _ => ids.pop().expect("enough sampled cases"),
            };
            plans.insert(id.to_string(), p);
        }
    };
    assign(&mut one, groups.one_page_suitable, &mut plans);
    assign(&mut one, groups.one_page_unsuitable, &mut plans);
    assign(&mut multi, groups.multi_page_suitable, &mut plans);
    assign(&mut multi, groups.multi_page_unsuitable, &mut plans);
    assert!(
        one.is_empty() && multi.is_empty(),
        "every sampled case gets a plan"
    );
    assert_eq!(plans.len(), 260);

    // Corpus.
    let mut docs = Vec::with_capacity(CORPUS_SIZE);
    let mut case_parties = BTreeMap::new();
    for slot in &slots {
        let mut p = parties(&mut rng, slot.year);
        if slot.case_id == EXAMPLE_ONE {
            p.claimant = "Mr Y Mfunda".into();
            p.respondent = "Swaay Child and Adolescent Services Ltd".into();
            p.hearing = "9 March 2018".into();
        } else if slot.case_id == EXAMPLE_TWO {
            p.claimant = "Mr A Martin".into();
            p.respondent =
                "1. Southwark Council 2. The Governing Body of Evangelina Hospital School".into();
            p.hearing = "15 April 2019".into();
        }
        let plan = plans.get(&slot.case_id);
        let target = match slot.estimated {
            Some((lo, _)) => lo,
            None => 900 + 600 * slot.pages.min(12) as usize,
        };
        let body = judgment_body(&slot.case_id, plan, &p, &mut rng, target);
        if let Some((_, hi)) = slot.estimated {
            assert!(body.chars().count() <= hi, "{} body too long", slot.case_id);
        }
        let meta = CaseMeta {
            page_count: slot.estimated.is_none().then_some(slot.pages),
            filing_date: Some(format!(
                "{}-{:02}-{:02}",
                slot.year,
                rng.random_range(1..=12),
                rng.random_range(1..=28)
            )),
            decision_date: None,
            hearing_venue: Some(p.venue.to_string()),
            jurisdiction_codes: p
                .claims
                .iter()
                .map(|&i| CLAIMS[i].code.to_string())
                .collect(),
            judges: vec![p.judge.to_string()],
            claimants: vec![p.claimant.clone()],
            respondents: vec![p.respondent.clone()],
        };
        docs.push(CaseDocument::new(&slot.case_id, body, meta).expect("valid document"));
        case_parties.insert(slot.case_id.clone(), p);
    }
    let corpus = Corpus::new(docs).expect("unique ids");
    corpus.write_dir(&out.join("corpus")).expect("write corpus");

    let check = sample(corpus.docs(), &plan, seed).expect("sample");
    assert_eq!(
        check.case_ids, manifest.case_ids,
        "final corpus reproduces the sample"
    );
    manifest
        .save(&out.join("sample.json"))
        .expect("write sample");

    // Replay cache.
    let registry = PromptRegistry::builtin();
    let template = TemplateRef::final_prompt();
    let model = ModelConfig::default();
    let cache = ReplayCache::open(out.join("cache")).expect("open cache");
    for (n, id) in manifest.case_ids.iter().enumerate() {
        let plan = &plans[id];
        let text = match plan.kind {
            Kind::ExampleOne => EXAMPLE_ONE_RESPONSE.to_string(),
            Kind::ExampleTwo => EXAMPLE_TWO_RESPONSE.to_string(),
            _ => {
                let secs = sections(plan, &case_parties[id], &mut rng);
                render(&secs, n % 3)
            }
        };
        let doc = corpus.get(id).unwrap();
        let req = build_request(&registry, &template, doc, &model).expect("request");
        let prompt_tokens = ((req.system_text.len() + req.user_text.len()) / 4) as u64;
        let completion_tokens = (text.len() / 4) as u64;
        let meta = CacheEntryMeta {
            template_id: req.template.id.clone(),
            version: req.template.version.clone(),
            case_id: id.clone(),
            model_id: req.model_id.clone(),
            temperature: req.temperature,
            prompt_tokens,
            completion_tokens,
            latency_ms: 8_000 + completion_tokens * 25,
        };
        cache
            .put(&req.replay_key(), &text, &meta)
            .expect("cache put");
    }

    // Records, through the same replay path the CLI uses.
    let transport = Arc::new(OfflineTransport::default());
    let gateway = Gateway::new(GatewayConfig::default(), transport.clone(), Some(cache));
    let job = ExtractJob {
        corpus: &corpus,
        case_ids: &manifest.case_ids,
        registry: &registry,
        template,
        model,
        markers: AbsenceMarkers::default(),
        mode: Mode::ReplayStrict,
        responses_dir: out.join("responses"),
        records_dir: out.join("records"),
        threads: 4,
    };
    let report = run_extract(&job, &gateway).expect("extract");
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(transport.contacts(), 0);

    let records = load_records(&out.join("records")).expect("records");
    for rec in &records {
        let plan = &plans[&rec.case_id];
        assert_eq!(rec.outcome_label, plan.label, "{}", rec.case_id);
        if plan.suitable {
            assert!(
                uket_core::dataset::leakage_check(rec).is_ok(),
                "{} leaks",
                rec.case_id
            );
        }
    }

    // Annotations, one per sampled case, in sample order.
    let store = AnnotationStore::open(out.join("annotations")).expect("annotation store");
    let start = Utc.with_ymd_and_hms(2023, 9, 4, 9, 0, 0).unwrap();
    for (n, id) in manifest.case_ids.iter().enumerate() {
        let plan = &plans[id];
        let mut scores = [1u8; 8];
        for a in &plan.fails {
            scores[a.number() - 1] = 0;
        }
        let at = start + Duration::minutes(17 * n as i64);
        let procedural = plan.suitable.then_some(plan.procedural as u8);
        let a = QualityAnnotation::from_scores(
            id,
            scores,
            plan.suitable as u8,
            procedural,
            ANNOTATOR,
            at,
        );
        store.store(&a, 0).expect("store annotation");
    }

    write_config(&out);
    println!(
        "fixture written to {} (seed {seed}, {} cases, {} sampled)",
        out.display(),
        corpus.len(),
        manifest.case_ids.len()
    );
}

fn write_config(out: &Path) {
    let rates = RateCard {
        prompt_per_1k: 0.06,
        completion_per_1k: 0.12,
    };
    let text = format!(
        "[paths]\ncorpus = \"corpus\"\nsample = \"sample.json\"\ncache = \"cache\"\nresponses = \"responses\"\nrecords = \"records\"\nannotations = \"annotations\"\n\n\
         [model]\nmodel_id = \"gpt-4-32k\"\ntemperature = 0.0\nmax_output_tokens = 4096\n\n\
         [gateway]\nendpoint = \"https://api.openai.com/v1/chat/completions\"\nmax_in_flight = 4\n\
         rates = {{ prompt_per_1k = {:?}, completion_per_1k = {:?} }}\n\n\
         [extraction]\ntemplate = \"uket-final/v1\"\n\n\
         [stats]\ninterval_method = \"sample-wide\"\n\n\
         [service]\nport = 8787\npage_size = 50\n",
        rates.prompt_per_1k, rates.completion_per_1k
    );
    fs::write(out.join("config.toml"), text).expect("write config");
}
