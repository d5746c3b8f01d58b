//! Teaching sessions and their event logs.
//!
//! Every mutation of a session is an [`Event`]; a session is exactly the
//! fold of its events, so replaying a log rebuilds it bit for bit.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stand_core::teachsim::{active_select, random_problem, Learner, Problem, StandLearner, State};
use stand_core::{Example, FeatureSchema, Literal, StandTree, ValueIndex};

use crate::export::{export_stand, leaf_summary_doc, subset_key, LeafSummaryDoc, StandExport};
use crate::formats::{resolve_values, value_names, DatasetDoc, LabelPolicy, ValueDoc};

/// Why a request could not be applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    BadRequest(String),
    SchemaMismatch(String),
    Internal(String),
}

impl From<stand_core::Error> for Rejection {
    fn from(e: stand_core::Error) -> Self {
        Rejection::Internal(e.to_string())
    }
}

impl From<std::io::Error> for Rejection {
    fn from(e: std::io::Error) -> Self {
        Rejection::Internal(format!("event log: {e}"))
    }
}

pub type Outcome<T> = Result<T, Rejection>;

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolConfig {
    pub size: usize,
    pub states: usize,
    pub candidates: usize,
    pub seed: u64,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self { size: 20, states: 3, candidates: 4, seed: 0 }
    }
}

/// Body of `POST /sessions`: a schema, or a labeled dataset to start from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    #[serde(default)]
    pub schema: Option<FeatureSchema>,
    #[serde(default)]
    pub dataset: Option<DatasetDoc>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub pool: PoolConfig,
}

fn default_alpha() -> f64 {
    stand_core::tree::DEFAULT_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Created { id: String, schema: FeatureSchema, alpha: f64, pool: PoolConfig, initial: Vec<Example>, at_ms: u64 },
    Label { values: Vec<ValueIndex>, label: bool, at_ms: u64 },
    Suggest { at_ms: u64 },
}

/// Problem as sent to and from clients, values by domain name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub states: Vec<StateDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub candidates: Vec<Vec<ValueDoc>>,
}

impl ProblemDoc {
    pub fn new(schema: &FeatureSchema, p: &Problem) -> Self {
        Self {
            states: p
                .states
                .iter()
                .map(|s| StateDoc { candidates: s.candidates.iter().map(|c| value_names(schema, &c.values)).collect() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRequest {
    pub values: Vec<ValueDoc>,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelOutcome {
    /// Whether the option structure or any leaf's ambiguity changed.
    pub changed: bool,
    pub ambiguity_before: Option<usize>,
    pub ambiguity_after: usize,
    pub prediction_before: bool,
    pub signed_ic_before: f64,
    /// Leaves of the updated model holding the new example.
    pub affected_leaves: Vec<String>,
    pub training_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafBreakdown {
    pub leaf: String,
    pub label: bool,
    pub ambiguity: usize,
    pub satisfied: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub values: Vec<ValueDoc>,
    pub prediction: bool,
    pub signed_ic: f64,
    pub ic_plus: Option<f64>,
    pub ic_minus: Option<f64>,
    pub leaves: Vec<LeafBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub candidates: Vec<CandidateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatesOutcome {
    pub states: Vec<StateReport>,
    /// Minimum certainty over predicted-positive candidates, 0 if none.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestOutcome {
    pub problem: ProblemDoc,
    pub index: usize,
    pub score: f64,
    pub scores: Vec<f64>,
    /// Every pool problem is fully certain: nothing left to teach.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub schema: FeatureSchema,
    pub alpha: f64,
    pub training_size: usize,
    pub ambiguity: Option<usize>,
    /// Model ambiguity after every label, in order.
    pub ambiguity_trace: Vec<usize>,
    pub leaves: Vec<LeafSummaryDoc>,
    pub tree: Option<StandExport>,
    pub pool: Vec<ProblemDoc>,
    pub events: usize,
    pub created_ms: u64,
    pub updated_ms: u64,
}

/// Per node: leaf label, split literals and leaf ambiguity. Ignores which
/// samples fill each node.
type Shape = Vec<(Option<bool>, Vec<Literal>, Option<usize>)>;

pub struct Session {
    id: String,
    schema: FeatureSchema,
    alpha: f64,
    pool_config: PoolConfig,
    learner: StandLearner,
    pool: Vec<Problem>,
    rng: ChaCha8Rng,
    ambiguity_trace: Vec<usize>,
    events: Vec<Event>,
    created_ms: u64,
    updated_ms: u64,
    log: Option<File>,
}

impl Session {
    /// Validates a create request into its `Created` event.
    pub fn creation(id: String, req: CreateRequest) -> Outcome<Event> {
        let (schema, initial) = match (req.schema, req.dataset) {
            (Some(_), Some(_)) => return Err(Rejection::BadRequest("give either `schema` or `dataset`, not both".into())),
            (None, None) => return Err(Rejection::BadRequest("missing `schema` or `dataset`".into())),
            (Some(s), None) => (s, Vec::new()),
            (None, Some(d)) => {
                let data = d.into_dataset(LabelPolicy::Required).map_err(|e| Rejection::BadRequest(e.to_string()))?;
                (data.schema().clone(), data.examples().to_vec())
            }
        };
        stand_core::tree::check_alpha(req.alpha).map_err(|e| Rejection::BadRequest(e.to_string()))?;
        let p = &req.pool;
        if p.size == 0 || p.states == 0 || p.candidates == 0 {
            return Err(Rejection::BadRequest("pool size, states and candidates must be at least 1".into()));
        }
        Ok(Event::Created { id, schema, alpha: req.alpha, pool: req.pool, initial, at_ms: now_ms() })
    }

    /// Builds a session from its creation event, optionally logging to `log`.
    pub fn start(created: Event, log: Option<&Path>) -> Outcome<Self> {
        let Event::Created { id, schema, alpha, pool, initial, at_ms } = created.clone() else {
            return Err(Rejection::Internal("log does not start with a creation event".into()));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(pool.seed);
        let problems = (0..pool.size).map(|_| random_problem(&schema, pool.states, pool.candidates, &mut rng)).collect();
        let mut learner = StandLearner::new(schema.clone(), alpha);
        learner.observe(&initial)?;
        let mut session = Session {
            id,
            schema,
            alpha,
            pool_config: pool,
            learner,
            pool: problems,
            rng,
            ambiguity_trace: Vec::new(),
            events: Vec::new(),
            created_ms: at_ms,
            updated_ms: at_ms,
            log: None,
        };
        if let Some(path) = log {
            session.log = Some(OpenOptions::new().create(true).append(true).open(path)?);
        }
        session.record(created)?;
        Ok(session)
    }

    /// Rebuilds a session from a log file and keeps appending to it.
    pub fn replay(path: &Path) -> Outcome<Self> {
        let events = read_log(path)?;
        let mut it = events.into_iter();
        let first = it.next().ok_or_else(|| Rejection::Internal(format!("{} is empty", path.display())))?;
        let mut session = Session::start(first, None)?;
        for e in it {
            session.apply(e)?;
        }
        session.log = Some(OpenOptions::new().append(true).open(path)?);
        Ok(session)
    }

    /// Rebuilds a session from events without touching disk.
    pub fn from_events(events: &[Event]) -> Outcome<Self> {
        let (first, rest) = events.split_first().ok_or_else(|| Rejection::Internal("no events".into()))?;
        let mut session = Session::start(first.clone(), None)?;
        for e in rest {
            session.apply(e.clone())?;
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn tree(&self) -> Option<&StandTree> {
        self.learner.tree()
    }

    fn record(&mut self, event: Event) -> Outcome<()> {
        if let Some(log) = &mut self.log {
            let mut line = serde_json::to_string(&event).map_err(|e| Rejection::Internal(e.to_string()))?;
            line.push('\n');
            log.write_all(line.as_bytes())?;
            log.flush()?;
        }
        self.events.push(event);
        Ok(())
    }

    fn apply(&mut self, event: Event) -> Outcome<()> {
        match event {
            Event::Created { .. } => Err(Rejection::Internal("second creation event".into())),
            Event::Label { values, label, at_ms } => self.label_indices(values, label, at_ms).map(drop),
            Event::Suggest { at_ms } => self.suggest_at(at_ms).map(drop),
        }
    }

    fn resolve(&self, values: &[ValueDoc]) -> Outcome<Vec<ValueIndex>> {
        resolve_values(&self.schema, values).map_err(Rejection::SchemaMismatch)
    }

    pub fn label(&mut self, req: LabelRequest) -> Outcome<LabelOutcome> {
        let values = self.resolve(&req.values)?;
        self.label_indices(values, req.label, now_ms())
    }

    fn label_indices(&mut self, values: Vec<ValueIndex>, label: bool, at_ms: u64) -> Outcome<LabelOutcome> {
        self.schema.check_values(&values).map_err(Rejection::SchemaMismatch)?;
        let before = self.learner.report(&values);
        let ambiguity_before = self.learner.ambiguity();
        let shape_before = self.learner.tree().map(|t| self.shape(t));
        self.learner.observe(&[Example::labeled(values.clone(), label)])?;
        let tree = self.learner.tree().expect("model exists after a label");
        let new = tree.data().len() as u32 - 1;
        let affected_leaves = tree
            .route(&values)
            .into_iter()
            .filter(|&l| tree.node(l).key().contains(new))
            .map(|l| subset_key(tree.node(l).key().samples()))
            .collect();
        let ambiguity_after = self.learner.ambiguity().unwrap_or(0);
        let outcome = LabelOutcome {
            changed: shape_before.as_ref() != Some(&self.shape(tree)),
            ambiguity_before,
            ambiguity_after,
            prediction_before: before.as_ref().is_some_and(|r| r.prediction()),
            signed_ic_before: before.map_or(0.0, |r| r.signed_ic),
            affected_leaves,
            training_size: tree.data().len(),
        };
        self.ambiguity_trace.push(ambiguity_after);
        self.updated_ms = at_ms;
        self.record(Event::Label { values, label, at_ms })?;
        Ok(outcome)
    }

    fn shape(&self, tree: &StandTree) -> Shape {
        let mut s: Shape = tree
            .ids()
            .map(|id| (tree.node(id).leaf_label(), tree.node(id).splits().iter().map(|s| s.literal).collect(), None))
            .collect();
        if let Some(space) = self.learner.version_space() {
            for summary in space.summaries() {
                s[summary.leaf.index()].2 = Some(summary.ambiguity());
            }
        }
        s
    }

    pub fn candidates(&self, problem: &ProblemDoc) -> Outcome<CandidatesOutcome> {
        let mut states = Vec::with_capacity(problem.states.len());
        let mut parsed = Problem { states: Vec::new() };
        for s in &problem.states {
            let mut reports = Vec::with_capacity(s.candidates.len());
            let mut cands = Vec::with_capacity(s.candidates.len());
            for c in &s.candidates {
                let values = self.resolve(c)?;
                reports.push(self.report(&values));
                cands.push(Example::unlabeled(values));
            }
            states.push(StateReport { candidates: reports });
            parsed.states.push(State { candidates: cands });
        }
        let score = stand_core::teachsim::problem_score(&self.learner, &parsed);
        Ok(CandidatesOutcome { states, score })
    }

    fn report(&self, values: &[ValueIndex]) -> CandidateReport {
        let names = value_names(&self.schema, values);
        match (self.learner.report(values), self.learner.tree()) {
            (Some(r), Some(tree)) => CandidateReport {
                values: names,
                prediction: r.prediction(),
                signed_ic: r.signed_ic,
                ic_plus: r.ic_plus,
                ic_minus: r.ic_minus,
                leaves: r
                    .leaves
                    .iter()
                    .map(|l| LeafBreakdown {
                        leaf: subset_key(tree.node(l.leaf).key().samples()),
                        label: l.label,
                        ambiguity: l.ambiguity,
                        satisfied: l.satisfied,
                        ratio: l.ratio(),
                    })
                    .collect(),
            },
            _ => CandidateReport {
                values: names,
                prediction: false,
                signed_ic: 0.0,
                ic_plus: None,
                ic_minus: None,
                leaves: Vec::new(),
            },
        }
    }

    pub fn suggest(&mut self) -> Outcome<SuggestOutcome> {
        self.suggest_at(now_ms())
    }

    fn suggest_at(&mut self, at_ms: u64) -> Outcome<SuggestOutcome> {
        let PoolConfig { states, candidates, .. } = self.pool_config;
        let (schema, rng) = (&self.schema, &mut self.rng);
        let sel = active_select(&self.learner, std::mem::take(&mut self.pool), || {
            Ok(random_problem(schema, states, candidates, rng))
        })?;
        self.pool = sel.pool;
        self.updated_ms = at_ms;
        self.record(Event::Suggest { at_ms })?;
        Ok(SuggestOutcome {
            problem: ProblemDoc::new(&self.schema, &sel.chosen),
            index: sel.index,
            score: sel.score,
            scores: sel.scores,
            complete: sel.score >= 1.0,
        })
    }

    pub fn state(&self) -> SessionState {
        let leaves = match (self.learner.tree(), self.learner.version_space()) {
            (Some(t), Some(v)) => v.summaries().iter().map(|s| leaf_summary_doc(t, s)).collect(),
            _ => Vec::new(),
        };
        SessionState {
            id: self.id.clone(),
            schema: self.schema.clone(),
            alpha: self.alpha,
            training_size: self.learner.training_len(),
            ambiguity: self.learner.ambiguity(),
            ambiguity_trace: self.ambiguity_trace.clone(),
            leaves,
            tree: self.learner.tree().map(export_stand),
            pool: self.pool.iter().map(|p| ProblemDoc::new(&self.schema, p)).collect(),
            events: self.events.len(),
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
        }
    }
}

pub fn read_log(path: &Path) -> Outcome<Vec<Event>> {
    let mut events = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line)
                .map_err(|e| Rejection::Internal(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(events)
}

pub fn log_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.jsonl"))
}
