//! Template-generated QA corpora for desk-scale experiments and tests.
//!
//! Each context describes one fictional organization in three to five fact sentences.
//! The question targets one fact; its answer is a year, person, city or count, all of
//! which the rule-based extractor recognizes. Optionally a decoy copy of the answer
//! sentence about a different organization is appended and recorded as a distractor.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Answer, Dataset, Origin, QAExample};
use crate::error::Result;
use crate::text::{char_len, round_count};

const SURNAMES: &[&str] = &[
    "Marlow",
    "Okafor",
    "Lindqvist",
    "Brandt",
    "Castell",
    "Duarte",
    "Hale",
    "Ivers",
    "Kessler",
    "Moreau",
    "Novak",
    "Pryce",
    "Quill",
    "Rowan",
    "Sato",
    "Thorne",
    "Vance",
    "Whitlock",
    "Yates",
    "Zeller",
    "Abbot",
    "Bristow",
    "Carver",
    "Delacroix",
    "Ellery",
    "Fenwick",
    "Garrow",
    "Hollis",
];
const FIRST_NAMES: &[&str] = &[
    "John", "Jane", "Mary", "Robert", "David", "Linda", "Thomas", "Sarah", "George", "Helen", "Peter", "Alice",
    "Henry", "Emma", "Frank", "Grace", "Albert", "Marie", "Victor", "Olivia",
];
const ORG_KINDS: &[&str] = &["Institute", "Company", "Foundation", "Society", "Museum", "College"];
const CITIES: &[&str] = &[
    "Paris", "London", "Berlin", "Madrid", "Vienna", "Boston", "Denver", "Chicago", "Toronto", "Dublin", "Lisbon",
    "Oslo", "Prague", "Seattle", "Atlanta", "Geneva", "Munich", "Milan", "Sydney", "Tokyo",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Year,
    Person,
    City,
    Count,
}

struct Fact {
    /// Sentence forms; the first mirrors the question wording.
    forms: &'static [&'static str],
    questions: &'static [(&'static str, Slot)],
}

/// `{O}` is the organization; other placeholders are filled per sentence.
const FACTS: &[Fact] = &[
    Fact {
        forms: &[
            "The {O} was founded in {Y} by {P}.",
            "{P} established the {O} in {Y}.",
            "In {Y}, {P} started the {O}.",
        ],
        questions: &[
            ("When was the {O} founded?", Slot::Year),
            ("Who founded the {O}?", Slot::Person),
        ],
    },
    Fact {
        forms: &[
            "The {O} moved its headquarters to {C} in {Y}.",
            "In {Y}, the {O} relocated its main office to {C}.",
        ],
        questions: &[
            ("Where did the {O} move its headquarters?", Slot::City),
            ("When did the {O} move its headquarters?", Slot::Year),
        ],
    },
    Fact {
        forms: &[
            "{P} became director of the {O} in {Y}.",
            "In {Y}, the {O} appointed {P} as its head.",
        ],
        questions: &[
            ("Who became director of the {O}?", Slot::Person),
            ("When did {P} become director of the {O}?", Slot::Year),
        ],
    },
    Fact {
        forms: &[
            "The {O} opened a second campus in {C} in {Y}.",
            "A new branch of the {O} started operating in {C} in {Y}.",
        ],
        questions: &[
            ("Where did the {O} open a second campus?", Slot::City),
            ("When did the {O} open a second campus?", Slot::Year),
        ],
    },
    Fact {
        forms: &[
            "By {Y}, the {O} had {N} members.",
            "Membership of the {O} reached {N} in {Y}.",
        ],
        questions: &[("How many members did the {O} have?", Slot::Count)],
    },
];

/// Chance that a fact uses one of its paraphrased forms.
const PARAPHRASE_RATE: f64 = 0.5;

const NEGATION_SENTENCE: &str = "The {O} never charged membership fees.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    /// Id prefix, so corpora built from different seeds can be combined.
    pub prefix: String,
    /// Exact share of examples whose context contains a negated sentence.
    pub negation_fraction: f64,
    /// Append an answer-sentence decoy about another organization to every example.
    pub addsent: bool,
}

impl SyntheticSpec {
    pub fn new(n: usize, seed: u64, prefix: impl Into<String>) -> Self {
        SyntheticSpec {
            n,
            seed,
            prefix: prefix.into(),
            negation_fraction: 0.0,
            addsent: false,
        }
    }
}

struct Fill {
    org: String,
    year: u32,
    person: String,
    city: &'static str,
    count: u32,
}

impl Fill {
    fn value(&self, slot: Slot) -> String {
        match slot {
            Slot::Year => self.year.to_string(),
            Slot::Person => self.person.clone(),
            Slot::City => self.city.to_string(),
            Slot::Count => self.count.to_string(),
        }
    }

    fn render(&self, template: &str) -> String {
        template
            .replace("{O}", &self.org)
            .replace("{Y}", &self.year.to_string())
            .replace("{P}", &self.person)
            .replace("{C}", self.city)
            .replace("{N}", &self.count.to_string())
    }
}

struct Draws {
    years: Vec<u32>,
    people: Vec<String>,
    cities: Vec<&'static str>,
}

impl Draws {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut years: Vec<u32> = (1850..2020).collect();
        years.shuffle(rng);
        let mut people: Vec<String> = Vec::new();
        while people.len() < 12 {
            let p = format!("{} {}", FIRST_NAMES.choose(rng).unwrap(), SURNAMES.choose(rng).unwrap());
            if !people.contains(&p) {
                people.push(p);
            }
        }
        let mut cities = CITIES.to_vec();
        cities.shuffle(rng);
        Draws { years, people, cities }
    }

    fn fill(&mut self, org: &str, rng: &mut ChaCha8Rng) -> Fill {
        Fill {
            org: org.to_string(),
            year: self.years.pop().unwrap(),
            person: self.people.pop().unwrap(),
            city: self.cities.pop().unwrap(),
            count: rng.gen_range(2..35) * 50,
        }
    }
}

fn org_name(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", SURNAMES.choose(rng).unwrap(), ORG_KINDS.choose(rng).unwrap())
}

fn build_example(id: String, negated: bool, addsent: bool, rng: &mut ChaCha8Rng) -> QAExample {
    let org = org_name(rng);
    let mut draws = Draws::new(rng);
    let n_facts = rng.gen_range(3..=FACTS.len());
    let mut chosen: Vec<usize> = index::sample(rng, FACTS.len(), n_facts).into_vec();
    chosen.shuffle(rng);
    let target = rng.gen_range(0..chosen.len());
    let (q_template, slot) = *FACTS[chosen[target]].questions.choose(rng).unwrap();

    let mut sentences: Vec<String> = Vec::new();
    let mut answer = (String::new(), 0usize);
    let mut question = String::new();
    let mut target_fact = 0;
    let mut pos = 0usize;
    for (k, &f) in chosen.iter().enumerate() {
        let fill = draws.fill(&org, rng);
        let form = if rng.gen_bool(PARAPHRASE_RATE) {
            rng.gen_range(1..FACTS[f].forms.len())
        } else {
            0
        };
        let s = fill.render(FACTS[f].forms[form]);
        if k == target {
            let value = fill.value(slot);
            let in_sentence = s.find(&value).expect("slot value rendered");
            answer = (value, pos + char_len(&s[..in_sentence]));
            question = fill.render(q_template);
            target_fact = f;
        }
        pos += char_len(&s) + 1;
        sentences.push(s);
    }
    let mut context = sentences.join(" ");
    if negated {
        context.push(' ');
        context.push_str(&NEGATION_SENTENCE.replace("{O}", &org));
    }
    let mut ex = QAExample::new(
        id,
        question,
        context,
        vec![Answer {
            text: answer.0,
            answer_start: answer.1,
        }],
    );
    if addsent {
        let mut other = org_name(rng);
        while other == org {
            other = org_name(rng);
        }
        let decoy = draws.fill(&other, rng).render(FACTS[target_fact].forms[0]);
        let start = char_len(&ex.context) + 1;
        ex.context.push(' ');
        ex.context.push_str(&decoy);
        ex.distractor_spans.push((start, start + char_len(&decoy)));
        ex.origin = Origin::Addsent;
    }
    ex
}

/// Generate a corpus; identical specs give identical output.
pub fn synthetic_corpus(spec: &SyntheticSpec) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = round_count(spec.negation_fraction, spec.n);
    let mut negated = vec![false; spec.n];
    for i in index::sample(&mut rng, spec.n, k.min(spec.n)) {
        negated[i] = true;
    }
    let examples = (0..spec.n)
        .map(|i| build_example(format!("{}{:06}", spec.prefix, i), negated[i], spec.addsent, &mut rng))
        .collect();
    Dataset::new(examples, "synthetic")
}
