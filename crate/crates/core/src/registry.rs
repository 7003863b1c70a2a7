//! Reviewed sensitivity methods as data, and the six-step recommender.
//!
//! Steps 1 (estimand), 2 (confounder position), 3 (metric and outcome type)
//! and 6 (functional class) are hard filters. Steps 4 (covariate adjustment)
//! and 5 (assumptions about U) only demote a method and are reported as unmet.
//! Ranking: implemented here first, then fewer unmet soft criteria, then
//! newer citation year, then id.

use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Reverse;
use std::collections::HashSet;
use std::fmt;

const BUILTIN: &str = include_str!("../data/methods.toml");

/// Ids allowed to carry `implemented-here = true`.
pub const IMPLEMENTED_IDS: [&str; 6] = [
    "evalue",
    "manski",
    "ovb",
    "copula-rho",
    "mediation-rho",
    "bias-formula",
];

/// Shown when no implemented method survives the filters.
pub const GAP_MESSAGE: &str = "no suitable sensitivity analysis is implemented for this setting; \
the closest reviewed methods are listed under excluded with the criterion that ruled them out";

macro_rules! kebab_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $s)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($name::$variant),)+
                    _ => Err(Error::InvalidAnswers(vec![format!(
                        "`{s}` is not a valid {}", stringify!($name)
                    )])),
                }
            }
        }
    };
}

kebab_enum!(Estimand {
    Ace => "ace",
    Cace => "cace",
    Rr => "rr",
    Or => "or",
    Rd => "rd",
    Nde => "nde",
    Nie => "nie",
    Late => "late",
    MultiTreatment => "multi-treatment",
});

kebab_enum!(
    /// Value type of an outcome or of the unmeasured confounder.
    ValueType {
        Binary => "binary",
        Continuous => "continuous",
        Any => "any",
    }
);

kebab_enum!(ConfounderPosition {
    TreatmentOutcome => "treatment-outcome",
    MediatorOutcome => "mediator-outcome",
    InstrumentOutcome => "instrument-outcome",
});

kebab_enum!(Metric {
    RiskRatio => "risk-ratio",
    OddsRatio => "odds-ratio",
    PartialR2 => "partial-r2",
    Correlation => "correlation",
    Probability => "probability",
    Coefficient => "coefficient",
    None => "none",
});

kebab_enum!(FunctionalClass {
    AssumptionFree => "assumption-free",
    ParametricLinear => "parametric-linear",
    ParametricNonlinear => "parametric-nonlinear",
    Semiparametric => "semiparametric",
    Nonparametric => "nonparametric",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SensitivityParameters {
    pub count: u32,
    pub metric: Metric,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MethodRecord {
    pub id: String,
    pub citation: String,
    pub year: u16,
    pub estimands: Vec<Estimand>,
    pub outcome_types: Vec<ValueType>,
    pub positions: Vec<ConfounderPosition>,
    pub functional_class: FunctionalClass,
    pub covariate_adjustment: bool,
    pub distribution_assumption_on_u: bool,
    pub u_types: Vec<ValueType>,
    pub multiple_confounders: bool,
    pub implemented_here: bool,
    pub parameters: SensitivityParameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub version: String,
    pub methods: Vec<MethodRecord>,
}

impl Registry {
    pub fn new(version: String, methods: Vec<MethodRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        for m in &methods {
            let bad = |why: &str| Error::Config(format!("method `{}`: {why}", m.id));
            if m.id.is_empty() || !ids.insert(m.id.as_str()) {
                return Err(bad("empty or duplicate id"));
            }
            if m.implemented_here && !IMPLEMENTED_IDS.contains(&m.id.as_str()) {
                return Err(bad("marked implemented but has no implementation"));
            }
            if m.citation.trim().is_empty() {
                return Err(bad("missing citation"));
            }
            if m.estimands.is_empty() || m.outcome_types.is_empty() || m.positions.is_empty() {
                return Err(bad(
                    "estimands, outcome types and positions must be non-empty",
                ));
            }
        }
        Ok(Self { version, methods })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            version: String,
            methods: Vec<MethodRecord>,
        }
        let raw: Raw = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::new(raw.version, raw.methods)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("registry serializes")
    }

    pub fn get(&self, id: &str) -> Option<&MethodRecord> {
        self.methods.iter().find(|m| m.id == id)
    }
}

/// The registry shipped with the crate.
pub fn builtin_registry() -> Registry {
    Registry::from_toml(BUILTIN).expect("built-in registry is valid")
}

/// Either a wildcard or an explicit non-empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice<T> {
    Any,
    Only(Vec<T>),
}

impl<T: PartialEq> Choice<T> {
    pub fn admits(&self, v: &T) -> bool {
        match self {
            Choice::Any => true,
            Choice::Only(vs) => vs.contains(v),
        }
    }

    fn is_empty_set(&self) -> bool {
        matches!(self, Choice::Only(v) if v.is_empty())
    }
}

impl<T: Serialize> Serialize for Choice<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Choice::Any => s.serialize_str("any"),
            Choice::Only(v) => v.serialize(s),
        }
    }
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for Choice<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            List(Vec<T>),
            One(T),
            Word(String),
        }
        match Repr::<T>::deserialize(d)? {
            Repr::List(v) => Ok(Choice::Only(v)),
            Repr::One(v) => Ok(Choice::Only(vec![v])),
            Repr::Word(w) if w == "any" => Ok(Choice::Any),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "unrecognised value `{w}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step1 {
    pub estimands: Choice<Estimand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step2 {
    pub position: Choice<ConfounderPosition>,
    #[serde(default)]
    pub identification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step3 {
    pub metrics: Choice<Metric>,
    pub outcome: ValueType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step4 {
    pub covariate_adjustment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step5 {
    pub u_type: ValueType,
    pub distribution_prior: bool,
    pub count: u32,
    pub assumption_free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Step6 {
    pub classes: Choice<FunctionalClass>,
}

/// Answers to the six workflow questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowAnswers {
    pub step1: Step1,
    pub step2: Step2,
    pub step3: Step3,
    pub step4: Step4,
    pub step5: Step5,
    pub step6: Step6,
}

impl WorkflowAnswers {
    /// No filters: every method passes the hard criteria.
    pub fn wildcard() -> Self {
        Self {
            step1: Step1 {
                estimands: Choice::Any,
            },
            step2: Step2 {
                position: Choice::Any,
                identification: String::new(),
            },
            step3: Step3 {
                metrics: Choice::Any,
                outcome: ValueType::Any,
            },
            step4: Step4 {
                covariate_adjustment: false,
            },
            step5: Step5 {
                u_type: ValueType::Any,
                distribution_prior: true,
                count: 1,
                assumption_free: false,
            },
            step6: Step6 {
                classes: Choice::Any,
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let answers: Self =
            toml::from_str(text).map_err(|e| Error::InvalidAnswers(vec![e.to_string()]))?;
        answers.validate()?;
        Ok(answers)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("answers serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.step1.estimands.is_empty_set() {
            problems.push("step1.estimands: empty (use \"any\")".to_string());
        }
        if self.step2.position.is_empty_set() {
            problems.push("step2.position: empty (use \"any\")".to_string());
        }
        if self.step3.metrics.is_empty_set() {
            problems.push("step3.metrics: empty (use \"any\")".to_string());
        }
        if self.step5.count == 0 {
            problems.push("step5.count: must be at least 1".to_string());
        }
        if self.step6.classes.is_empty_set() {
            problems.push("step6.classes: empty (use \"any\")".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAnswers(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMethod {
    pub id: String,
    pub rationale: String,
    pub unmet: Vec<String>,
    pub implemented_here: bool,
    pub year: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedMethod {
    pub id: String,
    pub step: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub ranked: Vec<RankedMethod>,
    pub excluded: Vec<ExcludedMethod>,
    /// Set when no implemented method passes the hard filters.
    pub gap: Option<String>,
}

fn list<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("/")
}

fn hard_failure(a: &WorkflowAnswers, m: &MethodRecord) -> Option<(u8, String)> {
    if let Choice::Only(wanted) = &a.step1.estimands {
        if let Some(e) = wanted.iter().find(|e| !m.estimands.contains(e)) {
            return Some((
                1,
                format!("does not target {e} (targets {})", list(&m.estimands)),
            ));
        }
    }
    if !m.positions.iter().any(|p| a.step2.position.admits(p)) {
        return Some((2, format!("confounder position is {}", list(&m.positions))));
    }
    if !a.step3.metrics.admits(&m.parameters.metric) {
        return Some((3, format!("metric is {}", m.parameters.metric)));
    }
    let outcome = a.step3.outcome;
    if outcome != ValueType::Any
        && !m.outcome_types.contains(&outcome)
        && !m.outcome_types.contains(&ValueType::Any)
    {
        return Some((3, format!("outcome type is {}", list(&m.outcome_types))));
    }
    if !a.step6.classes.admits(&m.functional_class) {
        return Some((6, format!("functional class is {}", m.functional_class)));
    }
    None
}

fn soft_unmet(a: &WorkflowAnswers, m: &MethodRecord) -> Vec<String> {
    let mut unmet = Vec::new();
    if a.step4.covariate_adjustment && !m.covariate_adjustment {
        unmet.push("step4: no adjustment for observed covariates".to_string());
    }
    let u = a.step5.u_type;
    if u != ValueType::Any && !m.u_types.contains(&u) && !m.u_types.contains(&ValueType::Any) {
        unmet.push(format!(
            "step5: handles {} confounders only",
            list(&m.u_types)
        ));
    }
    if !a.step5.distribution_prior && m.distribution_assumption_on_u {
        unmet.push("step5: needs a distribution for U".to_string());
    }
    if a.step5.count > 1 && !m.multiple_confounders {
        unmet.push("step5: single unmeasured confounder only".to_string());
    }
    if a.step5.assumption_free && m.functional_class != FunctionalClass::AssumptionFree {
        unmet.push("step5: not assumption-free".to_string());
    }
    unmet
}

/// Filter and rank `registry` for the given answers.
pub fn recommend(answers: &WorkflowAnswers, registry: &Registry) -> Result<Recommendation> {
    answers.validate()?;
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for m in &registry.methods {
        match hard_failure(answers, m) {
            Some((step, reason)) => excluded.push(ExcludedMethod {
                id: m.id.clone(),
                step,
                reason,
            }),
            None => ranked.push(RankedMethod {
                id: m.id.clone(),
                rationale: format!(
                    "{}; {}; {} sensitivity parameter(s) on {}; {}{}",
                    list(&m.estimands),
                    list(&m.positions),
                    m.parameters.count,
                    m.parameters.metric,
                    m.functional_class,
                    if m.implemented_here {
                        "; implemented here"
                    } else {
                        ""
                    }
                ),
                unmet: soft_unmet(answers, m),
                implemented_here: m.implemented_here,
                year: m.year,
            }),
        }
    }
    ranked.sort_by(|a, b| {
        (
            Reverse(a.implemented_here),
            a.unmet.len(),
            Reverse(a.year),
            &a.id,
        )
            .cmp(&(
                Reverse(b.implemented_here),
                b.unmet.len(),
                Reverse(b.year),
                &b.id,
            ))
    });
    let gap = (!ranked.iter().any(|r| r.implemented_here)).then(|| GAP_MESSAGE.to_string());
    Ok(Recommendation {
        ranked,
        excluded,
        gap,
    })
}

/// The questionnaires of the three simulated settings (ACE; NDE/NIE; LATE).
pub fn setting_answers(setting: u8) -> Option<WorkflowAnswers> {
    let mut a = WorkflowAnswers::wildcard();
    a.step5.u_type = ValueType::Continuous;
    a.step5.distribution_prior = false;
    match setting {
        1 => {
            a.step1.estimands = Choice::Only(vec![Estimand::Ace]);
            a.step2.position = Choice::Only(vec![ConfounderPosition::TreatmentOutcome]);
            a.step2.identification = "conditional ignorability fails through U_AY".into();
            a.step3.metrics = Choice::Only(vec![Metric::PartialR2, Metric::Correlation]);
            a.step3.outcome = ValueType::Continuous;
        }
        2 => {
            a.step1.estimands = Choice::Only(vec![Estimand::Nde, Estimand::Nie]);
            a.step2.position = Choice::Only(vec![ConfounderPosition::MediatorOutcome]);
            a.step2.identification = "sequential ignorability fails through U_MY".into();
            a.step3.metrics = Choice::Only(vec![Metric::Correlation]);
            a.step3.outcome = ValueType::Continuous;
        }
        3 => {
            a.step1.estimands = Choice::Only(vec![Estimand::Late]);
            a.step2.position = Choice::Only(vec![ConfounderPosition::InstrumentOutcome]);
            a.step2.identification = "exclusion restriction fails through U_IY".into();
            a.step3.outcome = ValueType::Continuous;
        }
        _ => return None,
    }
    Some(a)
}
