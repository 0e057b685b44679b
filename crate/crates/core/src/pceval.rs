//! Pairwise-comparison analytics: observer screening by circular triads,
//! preference probabilities, and Bradley-Terry quality scores.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use thiserror::Error;

/// Observers with a transitivity rate below this are outliers.
pub const OUTLIER_THRESHOLD: f64 = 0.9;

pub const BT_TOLERANCE: f64 = 1e-8;
pub const BT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    A,
    B,
    Tie,
}

impl Outcome {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Some(Outcome::A),
            "b" => Some(Outcome::B),
            "tie" | "a=b" => Some(Outcome::Tie),
            _ => None,
        }
    }

    /// Score credited to stimulus A.
    pub fn score_a(self) -> f64 {
        match self {
            Outcome::A => 1.0,
            Outcome::B => 0.0,
            Outcome::Tie => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceRecord {
    pub observer: String,
    pub image: String,
    pub a: String,
    pub b: String,
    pub outcome: Outcome,
}

impl PreferenceRecord {
    pub fn new(observer: &str, image: &str, a: &str, b: &str, outcome: Outcome) -> Self {
        Self {
            observer: observer.into(),
            image: image.into(),
            a: a.into(),
            b: b.into(),
            outcome,
        }
    }

    fn pair(&self) -> (String, String) {
        if self.a <= self.b {
            (self.a.clone(), self.b.clone())
        } else {
            (self.b.clone(), self.a.clone())
        }
    }
}

#[derive(Debug, Error)]
pub enum PcError {
    #[error("no votes in input")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("observer {observer} on image {image}: missing pairs {}", fmt_pairs(.missing))]
    Incomplete {
        observer: String,
        image: String,
        missing: Vec<(String, String)>,
    },
    #[error("observer {observer} on image {image} compared {a} and {b} more than once")]
    Duplicate {
        observer: String,
        image: String,
        a: String,
        b: String,
    },
    #[error("comparison graph is disconnected; components: {}", fmt_components(.0))]
    Disconnected(Vec<Vec<String>>),
    #[error("every observer was rejected as an outlier")]
    NoObservers,
}

fn fmt_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(", ")
}

fn fmt_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reads `observer_id,image_id,stimulus_a,stimulus_b,outcome` rows.
pub fn read_votes<R: Read>(input: R) -> Result<Vec<PreferenceRecord>, PcError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let expected = ["observer_id", "image_id", "stimulus_a", "stimulus_b", "outcome"];
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(PcError::Empty);
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let cols: Vec<usize> = expected
        .iter()
        .map(|name| {
            col(name).ok_or_else(|| PcError::Malformed {
                line: 1,
                message: format!("missing column {name}"),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        let field = |k: usize| -> Result<&str, PcError> {
            match row.get(cols[k]) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(PcError::Malformed {
                    line,
                    message: format!("empty {}", expected[k]),
                }),
            }
        };
        let outcome_text = field(4)?;
        let outcome = Outcome::parse(outcome_text).ok_or_else(|| PcError::Malformed {
            line,
            message: format!("unknown outcome {outcome_text:?} (expected A, B, tie or A=B)"),
        })?;
        let record = PreferenceRecord::new(field(0)?, field(1)?, field(2)?, field(3)?, outcome);
        if record.a == record.b {
            return Err(PcError::Malformed {
                line,
                message: format!("stimulus {} compared with itself", record.a),
            });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(PcError::Empty);
    }
    Ok(records)
}

/// Win counts of one image; ties add 0.5 to each side.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    pub stimuli: Vec<String>,
    wins: Vec<f64>,
    pub observers: usize,
}

impl PreferenceMatrix {
    pub fn from_wins(stimuli: Vec<String>, wins: Vec<f64>, observers: usize) -> Self {
        assert_eq!(wins.len(), stimuli.len() * stimuli.len());
        Self {
            stimuli,
            wins,
            observers,
        }
    }

    /// Stimuli are taken in sorted order.
    pub fn from_records(records: &[PreferenceRecord]) -> Self {
        let stimuli: Vec<String> = records
            .iter()
            .flat_map(|r| [r.a.clone(), r.b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let observers = records.iter().map(|r| &r.observer).collect::<BTreeSet<_>>().len();
        let n = stimuli.len();
        let index = |s: &str| stimuli.binary_search_by(|x| x.as_str().cmp(s)).unwrap();
        let mut wins = vec![0.0; n * n];
        for r in records {
            let (a, b) = (index(&r.a), index(&r.b));
            wins[a * n + b] += r.outcome.score_a();
            wins[b * n + a] += 1.0 - r.outcome.score_a();
        }
        Self {
            stimuli,
            wins,
            observers,
        }
    }

    pub fn len(&self) -> usize {
        self.stimuli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stimuli.is_empty()
    }

    pub fn wins(&self, a: usize, b: usize) -> f64 {
        self.wins[a * self.len() + b]
    }

    pub fn votes(&self, a: usize, b: usize) -> f64 {
        self.wins(a, b) + self.wins(b, a)
    }
}

/// Preference probabilities; `None` marks pairs nobody voted on.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    pub stimuli: Vec<String>,
    p: Vec<Option<f64>>,
}

impl ProbabilityMatrix {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.p[a * self.stimuli.len() + b]
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.stimuli.iter().position(|s| s == a)?;
        let j = self.stimuli.iter().position(|s| s == b)?;
        self.get(i, j)
    }

    fn from_map(entries: &BTreeMap<(String, String), f64>) -> Self {
        let stimuli: Vec<String> = entries
            .keys()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = stimuli.len();
        let mut p = vec![None; n * n];
        for ((a, b), &v) in entries {
            let i = stimuli.iter().position(|s| s == a).unwrap();
            let j = stimuli.iter().position(|s| s == b).unwrap();
            p[i * n + j] = Some(v);
        }
        Self { stimuli, p }
    }

    fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        let n = self.stimuli.len();
        (0..n * n).filter_map(move |k| self.p[k].map(|v| (self.stimuli[k / n].as_str(), self.stimuli[k % n].as_str(), v)))
    }
}

/// `P_AB = w_AB / n_AB` with `n_AB` the votes cast on the pair (the number of
/// observers when everyone rated every pair).
pub fn preference_probabilities(m: &PreferenceMatrix) -> ProbabilityMatrix {
    let n = m.len();
    let p = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            let votes = m.votes(a, b);
            (a != b && votes > 0.0).then(|| m.wins(a, b) / votes)
        })
        .collect();
    ProbabilityMatrix {
        stimuli: m.stimuli.clone(),
        p,
    }
}

/// Averages probabilities over images, pair by pair, skipping images where a
/// pair is absent.
pub fn average_probabilities(matrices: &[ProbabilityMatrix]) -> ProbabilityMatrix {
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for m in matrices {
        for (a, b, v) in m.entries() {
            let e = sums.entry((a.to_string(), b.to_string())).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    ProbabilityMatrix::from_map(&sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect())
}

/// Number of circular triads in a strict preference relation over `n` items;
/// `beats[i * n + j]` is true when `i` was preferred to `j`.
pub fn count_circular_triads(n: usize, beats: &[bool]) -> usize {
    let b = |i: usize, j: usize| beats[i * n + j];
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if (b(i, j) && b(j, k) && b(k, i)) || (b(j, i) && b(k, j) && b(i, k)) {
                    count += 1;
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitivityReport {
    pub observer: String,
    /// `h_o`: comparisons made, ties included.
    pub comparisons: usize,
    /// `d_o`: circular triads over all images.
    pub circular_triads: usize,
    pub rate: f64,
    pub outlier: bool,
}

/// `R_o = 1 - d_o / h_o` for one observer. Triads are counted per image over
/// strict preferences only; a triad with a tie is never circular.
///
/// Every image must be complete: each pair of the stimuli the observer saw
/// on it must have been compared exactly once.
pub fn transitivity_rate(records: &[PreferenceRecord]) -> Result<TransitivityReport, PcError> {
    let mut stimuli: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        stimuli.entry(&r.image).or_default().extend([r.a.as_str(), r.b.as_str()]);
    }
    rate_with_stimuli(records, &stimuli)
}

fn rate_with_stimuli(
    records: &[PreferenceRecord],
    stimuli: &BTreeMap<&str, BTreeSet<&str>>,
) -> Result<TransitivityReport, PcError> {
    let observer = records.first().map(|r| r.observer.clone()).unwrap_or_default();
    let mut by_image: BTreeMap<&str, Vec<&PreferenceRecord>> = BTreeMap::new();
    for r in records {
        by_image.entry(&r.image).or_default().push(r);
    }
    let mut triads = 0;
    for (image, recs) in by_image {
        let names: Vec<&str> = stimuli[image].iter().copied().collect();
        let n = names.len();
        let idx = |s: &str| names.binary_search(&s).unwrap();
        let mut seen = vec![false; n * n];
        let mut beats = vec![false; n * n];
        for r in recs {
            let (a, b) = (idx(&r.a), idx(&r.b));
            if seen[a * n + b] {
                let (a, b) = r.pair();
                return Err(PcError::Duplicate {
                    observer,
                    image: image.into(),
                    a,
                    b,
                });
            }
            seen[a * n + b] = true;
            seen[b * n + a] = true;
            match r.outcome {
                Outcome::A => beats[a * n + b] = true,
                Outcome::B => beats[b * n + a] = true,
                Outcome::Tie => {}
            }
        }
        let missing: Vec<(String, String)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !seen[i * n + j])
            .map(|(i, j)| (names[i].to_string(), names[j].to_string()))
            .collect();
        if !missing.is_empty() {
            return Err(PcError::Incomplete {
                observer,
                image: image.into(),
                missing,
            });
        }
        triads += count_circular_triads(n, &beats);
    }
    let comparisons = records.len();
    let rate = if comparisons == 0 {
        1.0
    } else {
        1.0 - triads as f64 / comparisons as f64
    };
    Ok(TransitivityReport {
        observer,
        comparisons,
        circular_triads: triads,
        rate,
        outlier: rate < OUTLIER_THRESHOLD,
    })
}

/// Transitivity of every observer, with completeness judged against the
/// stimuli shown on each image to anyone.
pub fn screen_observers(records: &[PreferenceRecord]) -> Result<Vec<TransitivityReport>, PcError> {
    let mut stimuli: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut by_observer: BTreeMap<&str, Vec<PreferenceRecord>> = BTreeMap::new();
    for r in records {
        stimuli.entry(&r.image).or_default().extend([r.a.as_str(), r.b.as_str()]);
        by_observer.entry(&r.observer).or_default().push(r.clone());
    }
    by_observer.values().map(|recs| rate_with_stimuli(recs, &stimuli)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtScores {
    pub stimuli: Vec<String>,
    /// Strengths with unit geometric mean over stimuli that won something.
    pub strengths: Vec<f64>,
    /// `ln` of the strengths; sums to zero over the finite entries.
    pub log_scores: Vec<f64>,
    /// Stimuli that never won; their strength is 0.
    pub zero_wins: Vec<bool>,
    pub iterations: usize,
    pub converged: bool,
}

/// Connected components of the comparison graph, as sorted name lists.
pub fn comparison_components(m: &PreferenceMatrix) -> Vec<Vec<String>> {
    let n = m.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        comp[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if comp[j] == usize::MAX && m.votes(i, j) > 0.0 {
                    comp[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| m.stimuli[i].clone()).collect());
    }
    out
}

/// Maximum-likelihood Bradley-Terry strengths by minorization-maximization.
pub fn bradley_terry_scores(m: &PreferenceMatrix) -> Result<BtScores, PcError> {
    let components = comparison_components(m);
    if components.len() > 1 {
        return Err(PcError::Disconnected(components));
    }
    let n = m.len();
    let total_wins: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m.wins(i, j)).sum()).collect();
    let zero_wins: Vec<bool> = total_wins.iter().map(|&w| w <= 0.0).collect();
    let mut p: Vec<f64> = zero_wins.iter().map(|&z| if z { 0.0 } else { 1.0 }).collect();
    let mut iterations = 0;
    let mut converged = n < 2;
    while !converged && iterations < BT_MAX_ITERATIONS {
        iterations += 1;
        let mut next = vec![0.0; n];
        for i in (0..n).filter(|&i| !zero_wins[i]) {
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let votes = m.votes(i, j);
                    if votes > 0.0 {
                        votes / (p[i] + p[j])
                    } else {
                        0.0
                    }
                })
                .sum();
            next[i] = total_wins[i] / denom;
        }
        normalize_geometric(&mut next, &zero_wins);
        let change = (0..n)
            .filter(|&i| !zero_wins[i])
            .map(|i| ((next[i] - p[i]) / p[i]).abs())
            .fold(0.0, f64::max);
        p = next;
        converged = change < BT_TOLERANCE;
    }
    normalize_geometric(&mut p, &zero_wins);
    Ok(BtScores {
        stimuli: m.stimuli.clone(),
        log_scores: p.iter().map(|v| v.ln()).collect(),
        strengths: p,
        zero_wins,
        iterations,
        converged,
    })
}

fn normalize_geometric(p: &mut [f64], skip: &[bool]) {
    let logs: Vec<f64> = p.iter().zip(skip).filter(|(_, &s)| !s).map(|(v, _)| v.ln()).collect();
    if logs.is_empty() {
        return;
    }
    let scale = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    for (v, &s) in p.iter_mut().zip(skip) {
        if !s {
            *v /= scale;
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImageEvaluation {
    pub image: String,
    pub matrix: PreferenceMatrix,
    pub probabilities: ProbabilityMatrix,
    pub scores: BtScores,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub transitivity: Vec<TransitivityReport>,
    pub images: Vec<ImageEvaluation>,
    /// Probabilities averaged over images.
    pub mean_probabilities: ProbabilityMatrix,
}

impl EvaluationReport {
    pub fn excluded_observers(&self) -> impl Iterator<Item = &str> {
        self.transitivity.iter().filter(|t| t.outlier).map(|t| t.observer.as_str())
    }

    pub fn write_transitivity_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["observer_id", "comparisons", "circular_triads", "r_o", "outlier"])?;
        for t in &self.transitivity {
            w.write_record([
                t.observer.clone(),
                t.comparisons.to_string(),
                t.circular_triads.to_string(),
                format!("{:.6}", t.rate),
                t.outlier.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-image probabilities followed by the image average (`image_id` =
    /// `mean`).
    pub fn write_probabilities_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["image_id", "stimulus_a", "stimulus_b", "p_ab"])?;
        let rows = self
            .images
            .iter()
            .map(|e| (e.image.as_str(), &e.probabilities))
            .chain(std::iter::once(("mean", &self.mean_probabilities)));
        for (image, probs) in rows {
            for (a, b, v) in probs.entries() {
                w.write_record([image, a, b, &format!("{v:.6}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_scores_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["image_id", "stimulus", "strength", "log_score", "zero_wins", "converged"])?;
        for e in &self.images {
            let s = &e.scores;
            for i in 0..s.stimuli.len() {
                w.write_record([
                    e.image.clone(),
                    s.stimuli[i].clone(),
                    format!("{:.9}", s.strengths[i]),
                    format!("{:.9}", s.log_scores[i]),
                    s.zero_wins[i].to_string(),
                    s.converged.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Screens observers, drops outliers, then computes per-image probabilities
/// and Bradley-Terry scores.
pub fn evaluate(records: &[PreferenceRecord]) -> Result<EvaluationReport, PcError> {
    if records.is_empty() {
        return Err(PcError::Empty);
    }
    let transitivity = screen_observers(records)?;
    let outliers: BTreeSet<&str> = transitivity
        .iter()
        .filter(|t| t.outlier)
        .map(|t| t.observer.as_str())
        .collect();
    let mut by_image: BTreeMap<&str, Vec<PreferenceRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !outliers.contains(r.observer.as_str())) {
        by_image.entry(&r.image).or_default().push(r.clone());
    }
    if by_image.is_empty() {
        return Err(PcError::NoObservers);
    }
    let images = by_image
        .into_iter()
        .map(|(image, recs)| {
            let matrix = PreferenceMatrix::from_records(&recs);
            let scores = bradley_terry_scores(&matrix)?;
            Ok(ImageEvaluation {
                image: image.to_string(),
                probabilities: preference_probabilities(&matrix),
                matrix,
                scores,
            })
        })
        .collect::<Result<Vec<_>, PcError>>()?;
    let mean_probabilities = average_probabilities(&images.iter().map(|e| e.probabilities.clone()).collect::<Vec<_>>());
    Ok(EvaluationReport {
        transitivity,
        images,
        mean_probabilities,
    })
}

/// Reads probability tables written as `image_id,stimulus_a,stimulus_b,p_ab`
/// (`NA` marks an absent pair), grouped by the first column.
pub fn read_probabilities<R: Read>(input: R) -> Result<BTreeMap<String, ProbabilityMatrix>, PcError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut groups: BTreeMap<String, BTreeMap<(String, String), f64>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 4 {
            return Err(PcError::Malformed {
                line,
                message: format!("expected 4 fields, got {}", row.len()),
            });
        }
        let group = groups.entry(row[0].to_string()).or_default();
        if row[3].eq_ignore_ascii_case("na") {
            continue;
        }
        let v: f64 = row[3].parse().map_err(|_| PcError::Malformed {
            line,
            message: format!("bad probability {:?}", &row[3]),
        })?;
        group.insert((row[1].to_string(), row[2].to_string()), v);
    }
    if groups.is_empty() {
        return Err(PcError::Empty);
    }
    Ok(groups.into_iter().map(|(g, e)| (g, ProbabilityMatrix::from_map(&e))).collect())
}
