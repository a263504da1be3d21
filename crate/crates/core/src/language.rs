//! Task languages: vocabulary, grounding domains, grammar constraints,
//! and the per-level presets of the train micro-world.
//!
//! A language lists its background predicates with typed argument slots,
//! maps each value type to a finite ordered constant domain, and carries
//! grammar constraints that restrict which ground-atom combinations are
//! meaningful. `TRAIN`, `CAR`, and `NUM` are contextual types: their
//! domains come from the ids of the task at hand, with the `NUM` range
//! capped at the task's car count so the Herbrand base stays finite.

use crate::logic::{Atom, Term};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use thiserror::Error;

pub const TRAIN: &str = "TRAIN";
pub const CAR: &str = "CAR";
pub const NUM: &str = "NUM";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LanguageError {
    #[error("curriculum level {0} out of range 1..=20")]
    RangeError(u32),
    #[error("invalid language: {0}")]
    Invalid(String),
}

/// A background predicate signature: name plus one type id per argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSpec {
    pub name: String,
    pub arg_types: Vec<String>,
}

impl PredicateSpec {
    pub fn new(name: &str, arg_types: &[&str]) -> Self {
        PredicateSpec {
            name: name.to_string(),
            arg_types: arg_types.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    /// Car-keyed attribute predicates: first argument CAR, exactly one
    /// value argument. These carry one value per car in any background.
    pub fn is_car_attribute(&self) -> bool {
        self.arg_types.len() == 2 && self.arg_types[0] == CAR
    }
}

/// One argument slot of an [`AtomPattern`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgPattern {
    Any,
    /// The shared linkage slot; condition and forbidden atoms must agree
    /// on its value for the exclusion to fire.
    Key,
    Equal(Term),
    NotEqual(Term),
}

impl ArgPattern {
    fn matches(&self, t: &Term) -> bool {
        match self {
            ArgPattern::Any | ArgPattern::Key => true,
            ArgPattern::Equal(x) => x == t,
            ArgPattern::NotEqual(x) => x != t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomPattern {
    pub predicate: String,
    pub args: Vec<ArgPattern>,
}

impl AtomPattern {
    /// Returns the Key-slot value when the atom matches.
    fn match_key<'a>(&self, atom: &'a Atom) -> Option<Option<&'a Term>> {
        if atom.predicate != self.predicate || atom.args.len() != self.args.len() {
            return None;
        }
        let mut key = None;
        for (pat, arg) in self.args.iter().zip(&atom.args) {
            if !pat.matches(arg) {
                return None;
            }
            if matches!(pat, ArgPattern::Key) {
                key = Some(arg);
            }
        }
        Some(key)
    }
}

/// Grammar constraints beyond type compatibility (which is implicit in
/// the predicate signatures).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrammarConstraint {
    /// At most one value per key (first argument) for this predicate.
    Functional { predicate: String },
    /// Atoms matching `forbidden` are invalid alongside an atom matching
    /// `condition` with the same Key value.
    MutualExclusion { condition: AtomPattern, forbidden: AtomPattern },
}

/// A task language 𝓛: vocabulary plus grammar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Language {
    /// Background predicates, in enumeration order.
    pub predicates: Vec<PredicateSpec>,
    /// Value domains by type id, each finite and ordered.
    pub domains: std::collections::BTreeMap<String, Vec<Term>>,
    pub constraints: Vec<GrammarConstraint>,
    /// Positive-class target predicate (arity 1 over TRAIN).
    pub positive_target: String,
    /// Negative-class target predicate; when present, labeled examples
    /// render negatives through it (the classes are mutually exclusive).
    pub negative_target: Option<String>,
    /// Cars per train.
    pub num_cars: RangeInclusive<u32>,
}

impl Language {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSpec> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn predicate_names(&self) -> BTreeSet<(String, usize)> {
        self.predicates.iter().map(|p| (p.name.clone(), p.arity())).collect()
    }

    /// Car-keyed attribute predicates other than the structural
    /// `has_car`/`car_num` pair, in enumeration order.
    pub fn attribute_predicates(&self) -> Vec<&PredicateSpec> {
        self.predicates
            .iter()
            .filter(|p| p.is_car_attribute() && p.name != "car_num")
            .collect()
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        self.predicates.iter().any(|p| p.name == name)
    }

    /// The value domain for `type_id` in a task with `num_cars` cars.
    pub fn domain_in_context(&self, type_id: &str, num_cars: usize) -> Vec<Term> {
        if type_id == NUM {
            return (1..=num_cars as i64).map(Term::Int).collect();
        }
        self.domains.get(type_id).cloned().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), LanguageError> {
        for p in &self.predicates {
            for t in &p.arg_types {
                if t != TRAIN && t != CAR && t != NUM && !self.domains.contains_key(t) {
                    return Err(LanguageError::Invalid(format!(
                        "predicate {} references unknown domain type {t}",
                        p.name
                    )));
                }
            }
        }
        for (t, d) in &self.domains {
            if d.is_empty() {
                return Err(LanguageError::Invalid(format!("domain {t} is empty")));
            }
        }
        if self.num_cars.is_empty() || *self.num_cars.start() == 0 {
            return Err(LanguageError::Invalid("num_cars range must start at 1+".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("language serializes")
    }

    pub fn from_json(text: &str) -> Result<Language, LanguageError> {
        let lang: Language =
            serde_json::from_str(text).map_err(|e| LanguageError::Invalid(e.to_string()))?;
        lang.validate()?;
        Ok(lang)
    }

    /// A permissive language inferred from a background program: every
    /// predicate seen becomes known, with unconstrained argument types.
    /// Used when judging inline tasks that carry no language of their own.
    pub fn infer_from_background(program: &crate::logic::Program, target: &str) -> Language {
        let mut predicates = Vec::new();
        let mut seen = BTreeSet::new();
        for clause in &program.clauses {
            let key = clause.head.key();
            if seen.insert(key.clone()) {
                predicates.push(PredicateSpec {
                    name: key.0,
                    arg_types: vec!["ANY".to_string(); key.1],
                });
            }
        }
        let mut domains = std::collections::BTreeMap::new();
        domains.insert("ANY".to_string(), vec![Term::constant("any")]);
        Language {
            predicates,
            domains,
            constraints: Vec::new(),
            positive_target: target.to_string(),
            negative_target: None,
            num_cars: 1..=1,
        }
    }

    /// Whether `t` is an acceptable constant anywhere in a rule over
    /// this language: a member of some declared domain, an integer, or
    /// a task-scoped id (train/car ids are not statically known).
    pub fn constant_in_some_domain(&self, t: &Term) -> bool {
        match t {
            Term::Int(_) => true,
            Term::Constant(c) => {
                self.domains
                    .values()
                    .any(|d| d.iter().any(|v| matches!(v, Term::Constant(x) if x == c)))
                    || self.domains.contains_key("ANY")
            }
            _ => true,
        }
    }

    /// Typed membership check for a constant at a specific argument slot.
    pub fn constant_fits_type(&self, type_id: &str, t: &Term) -> bool {
        match type_id {
            TRAIN | CAR => matches!(t, Term::Constant(_)),
            NUM => matches!(t, Term::Int(n) if *n >= 1),
            "ANY" => true,
            _ => self.domains.get(type_id).map(|d| d.contains(t)).unwrap_or(false),
        }
    }
}

/// All well-typed ground atoms over the language's background predicates,
/// restricted to the given train/car ids, in deterministic order
/// (predicate enumeration order, then argument domain order).
pub fn herbrand_base(language: &Language, train_ids: &[String], car_ids: &[String]) -> Vec<Atom> {
    let trains: Vec<Term> = train_ids.iter().map(|t| Term::constant(t.clone())).collect();
    let cars: Vec<Term> = car_ids.iter().map(|c| Term::constant(c.clone())).collect();
    let mut out = Vec::new();
    for pred in &language.predicates {
        let slots: Vec<Vec<Term>> = pred
            .arg_types
            .iter()
            .map(|t| match t.as_str() {
                TRAIN => trains.clone(),
                CAR => cars.clone(),
                _ => language.domain_in_context(t, car_ids.len()),
            })
            .collect();
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for slot in &slots {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    slot.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Atom::new(pred.name.clone(), args)));
    }
    out
}

/// Keeps the atoms that satisfy every grammar constraint of the language,
/// preserving order. For functional predicates the first value per key
/// wins; for mutual exclusions the forbidden atom is dropped.
pub fn filter_by_grammar(atoms: &[Atom], language: &Language) -> Vec<Atom> {
    let mut kept: Vec<Atom> = Vec::new();
    for atom in atoms {
        if !language.has_predicate(&atom.predicate) {
            continue;
        }
        let functional_clash = language.constraints.iter().any(|c| match c {
            GrammarConstraint::Functional { predicate } => {
                *predicate == atom.predicate
                    && kept.iter().any(|k| {
                        k.predicate == atom.predicate && k.args.first() == atom.args.first()
                    })
            }
            _ => false,
        });
        if !functional_clash {
            kept.push(atom.clone());
        }
    }
    // exclusion pass: forbidden atoms are dropped when a condition atom
    // with the same key survives
    let snapshot = kept.clone();
    kept.retain(|atom| {
        !language.constraints.iter().any(|c| match c {
            GrammarConstraint::MutualExclusion { condition, forbidden } => {
                match forbidden.match_key(atom) {
                    Some(key) => snapshot
                        .iter()
                        .any(|other| other != atom && condition.match_key(other) == Some(key)),
                    None => false,
                }
            }
            _ => false,
        })
    });
    kept
}

/// Checks that a ground-atom set violates no constraint (used by
/// validators; samplers construct compliant sets directly).
pub fn satisfies_grammar(atoms: &[Atom], language: &Language) -> bool {
    filter_by_grammar(atoms, language) == atoms
}

// ---------------------------------------------------------------------------
// Train micro-world presets
// ---------------------------------------------------------------------------

fn base_domains() -> std::collections::BTreeMap<String, Vec<Term>> {
    let c = |names: &[&str]| -> Vec<Term> { names.iter().map(|n| Term::constant(*n)).collect() };
    let ints = |range: RangeInclusive<i64>| -> Vec<Term> { range.map(Term::Int).collect() };
    let mut d = std::collections::BTreeMap::new();
    d.insert("COLOR".into(), c(&["red", "blue", "green", "yellow", "white"]));
    d.insert("LEN".into(), c(&["short", "long"]));
    d.insert("WALL".into(), c(&["full", "railing"]));
    d.insert(
        "ROOF".into(),
        c(&["roof_foundation", "solid_roof", "braced_roof", "peaked_roof", "none"]),
    );
    d.insert("WHEELS".into(), ints(2..=3));
    d.insert(
        "LOADS".into(),
        c(&["blue_box", "golden_vase", "barrel", "diamond", "metal_pot", "oval_vase", "none"]),
    );
    d.insert("NPAY".into(), ints(0..=3));
    d.insert("WINDOW".into(), c(&["full", "half", "none"]));
    d.insert("CTYPE".into(), c(&["passenger", "freight", "mixed"]));
    d.insert("NPAX".into(), ints(0..=9));
    d
}

/// The full predicate pool in curriculum expansion order. The first five
/// are the base vocabulary; the rest join as levels require more
/// predicates, categorical attributes before numerical ones.
fn predicate_pool() -> Vec<PredicateSpec> {
    vec![
        PredicateSpec::new("has_car", &[TRAIN, CAR]),
        PredicateSpec::new("car_num", &[CAR, NUM]),
        PredicateSpec::new("car_color", &[CAR, "COLOR"]),
        PredicateSpec::new("car_len", &[CAR, "LEN"]),
        PredicateSpec::new("has_wall", &[CAR, "WALL"]),
        PredicateSpec::new("has_roof", &[CAR, "ROOF"]),
        PredicateSpec::new("has_payload", &[CAR, "LOADS"]),
        PredicateSpec::new("load_num", &[CAR, "NPAY"]),
        PredicateSpec::new("has_wheel", &[CAR, "WHEELS"]),
        PredicateSpec::new("has_window", &[CAR, "WINDOW"]),
        PredicateSpec::new("car_type", &[CAR, "CTYPE"]),
        PredicateSpec::new("passenger_num", &[CAR, "NPAX"]),
    ]
}

/// Predicate counts per level.
pub(crate) const LEVEL_PRED_COUNTS: [usize; 20] =
    [5, 5, 5, 5, 5, 5, 6, 6, 6, 7, 7, 9, 9, 9, 9, 10, 10, 12, 12, 12];

/// Cars per train per level.
pub(crate) const LEVEL_CAR_RANGES: [(u32, u32); 20] = [
    (1, 1),
    (1, 1),
    (1, 1),
    (2, 2),
    (2, 2),
    (2, 2),
    (2, 2),
    (2, 3),
    (2, 3),
    (2, 3),
    (2, 4),
    (2, 4),
    (4, 6),
    (4, 6),
    (4, 6),
    (5, 6),
    (5, 6),
    (5, 6),
    (5, 6),
    (5, 6),
];

/// The language for one curriculum level (1..=20). Vocabulary grows
/// monotonically with the level.
pub fn level_language(level: u32) -> Result<Language, LanguageError> {
    if !(1..=20).contains(&level) {
        return Err(LanguageError::RangeError(level));
    }
    let idx = (level - 1) as usize;
    let n_preds = LEVEL_PRED_COUNTS[idx];
    let (lo, hi) = LEVEL_CAR_RANGES[idx];
    let predicates: Vec<PredicateSpec> = predicate_pool().into_iter().take(n_preds).collect();

    let mut constraints: Vec<GrammarConstraint> = predicates
        .iter()
        .filter(|p| p.is_car_attribute())
        .map(|p| GrammarConstraint::Functional { predicate: p.name.clone() })
        .collect();
    let has = |n: &str| predicates.iter().any(|p| p.name == n);
    if has("car_type") && has("has_payload") {
        // passenger cars cannot carry payloads
        constraints.push(GrammarConstraint::MutualExclusion {
            condition: AtomPattern {
                predicate: "car_type".into(),
                args: vec![ArgPattern::Key, ArgPattern::Equal(Term::constant("passenger"))],
            },
            forbidden: AtomPattern {
                predicate: "has_payload".into(),
                args: vec![ArgPattern::Key, ArgPattern::NotEqual(Term::constant("none"))],
            },
        });
    }

    let lang = Language {
        predicates,
        domains: base_domains(),
        constraints,
        positive_target: "eastbound".into(),
        negative_target: Some("westbound".into()),
        num_cars: lo..=hi,
    };
    lang.validate().expect("level presets are valid");
    Ok(lang)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herbrand_base_of_single_attribute() {
        let lang = Language {
            predicates: vec![PredicateSpec::new("car_len", &[CAR, "LEN"])],
            domains: base_domains(),
            constraints: vec![],
            positive_target: "eastbound".into(),
            negative_target: None,
            num_cars: 1..=1,
        };
        let hb = herbrand_base(&lang, &["t1".into()], &["c1".into()]);
        assert_eq!(
            hb,
            vec![
                Atom::new("car_len", vec![Term::constant("c1"), Term::constant("short")]),
                Atom::new("car_len", vec![Term::constant("c1"), Term::constant("long")]),
            ]
        );
    }

    #[test]
    fn herbrand_base_count_matches_product_formula() {
        let lang = level_language(1).unwrap();
        let trains = vec!["t1".to_string()];
        let cars = vec!["c1".to_string()];
        let hb = herbrand_base(&lang, &trains, &cars);
        // independent product: sum over predicates of per-slot domain sizes
        let expected: usize = lang
            .predicates
            .iter()
            .map(|p| {
                p.arg_types
                    .iter()
                    .map(|t| match t.as_str() {
                        TRAIN => trains.len(),
                        CAR => cars.len(),
                        NUM => cars.len(),
                        other => lang.domains[other].len(),
                    })
                    .product::<usize>()
            })
            .sum();
        assert_eq!(hb.len(), expected);
        assert_eq!(expected, 1 + 1 + 5 + 2 + 2);
    }

    #[test]
    fn adding_roof_grows_base_by_cars_times_domain() {
        let without = level_language(6).unwrap();
        let mut with = without.clone();
        with.predicates.push(PredicateSpec::new("has_roof", &[CAR, "ROOF"]));
        let trains = vec!["t1".to_string()];
        let cars = vec!["c1".to_string(), "c2".to_string()];
        let before = herbrand_base(&without, &trains, &cars).len();
        let after = herbrand_base(&with, &trains, &cars).len();
        assert_eq!(after - before, 2 * 5);
    }

    #[test]
    fn grammar_filter_retains_well_typed_atoms() {
        let lang = level_language(1).unwrap();
        let atoms =
            vec![Atom::new("car_color", vec![Term::constant("c1"), Term::constant("red")])];
        assert_eq!(filter_by_grammar(&atoms, &lang), atoms);
        assert!(filter_by_grammar(&[], &lang).is_empty());
    }

    #[test]
    fn passenger_cars_cannot_carry_payloads() {
        let lang = level_language(18).unwrap();
        let passenger =
            Atom::new("car_type", vec![Term::constant("c1"), Term::constant("passenger")]);
        let barrel =
            Atom::new("has_payload", vec![Term::constant("c1"), Term::constant("barrel")]);
        let none = Atom::new("has_payload", vec![Term::constant("c1"), Term::constant("none")]);
        let filtered = filter_by_grammar(&[passenger.clone(), barrel.clone()], &lang);
        assert_eq!(filtered, vec![passenger.clone()]);
        // an explicit `none` payload is compatible with passenger cars
        let filtered = filter_by_grammar(&[passenger.clone(), none.clone()], &lang);
        assert_eq!(filtered, vec![passenger, none]);
        // the exclusion needs the same car
        let other_car =
            Atom::new("car_type", vec![Term::constant("c2"), Term::constant("passenger")]);
        let filtered = filter_by_grammar(&[other_car.clone(), barrel.clone()], &lang);
        assert_eq!(filtered, vec![other_car, barrel]);
    }

    #[test]
    fn functional_attributes_keep_first_value() {
        let lang = level_language(1).unwrap();
        let a = Atom::new("car_color", vec![Term::constant("c1"), Term::constant("red")]);
        let b = Atom::new("car_color", vec![Term::constant("c1"), Term::constant("blue")]);
        let c = Atom::new("car_color", vec![Term::constant("c2"), Term::constant("blue")]);
        assert_eq!(filter_by_grammar(&[a.clone(), b, c.clone()], &lang), vec![a, c]);
    }

    #[test]
    fn level_presets_match_curriculum_counts() {
        let l1 = level_language(1).unwrap();
        assert_eq!(l1.predicates.len(), 5);
        assert_eq!(l1.num_cars, 1..=1);
        let l10 = level_language(10).unwrap();
        assert_eq!(l10.predicates.len(), 7);
        assert_eq!(l10.num_cars, 2..=3);
        let l20 = level_language(20).unwrap();
        assert_eq!(l20.predicates.len(), 12);
        assert_eq!(l20.num_cars, 5..=6);
        assert!(level_language(0).is_err());
        assert!(level_language(21).is_err());
    }

    #[test]
    fn vocabulary_grows_monotonically() {
        for level in 1..20 {
            let a = level_language(level).unwrap().predicate_names();
            let b = level_language(level + 1).unwrap().predicate_names();
            assert!(a.is_subset(&b), "level {level} vocabulary not contained in next");
        }
    }

    #[test]
    fn filtered_base_is_subset_of_base() {
        let lang = level_language(18).unwrap();
        let hb = herbrand_base(&lang, &["t1".into()], &["c1".into(), "c2".into()]);
        let filtered = filter_by_grammar(&hb, &lang);
        assert!(filtered.len() <= hb.len());
        assert!(filtered.iter().all(|a| hb.contains(a)));
    }

    #[test]
    fn language_round_trips_through_json() {
        let lang = level_language(12).unwrap();
        let json = lang.to_json();
        let back = Language::from_json(&json).unwrap();
        assert_eq!(back, lang);
    }
}
