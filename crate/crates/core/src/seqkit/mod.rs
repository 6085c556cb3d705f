//! Step-sequence model and complexity metrics.
//!
//! A dance routine is a string over the four-step alphabet `{A,B,C,D}`; the
//! bundled corpus holds ten routines of 23 steps each together with judge
//! scores and measured robot energies. Three Shannon-entropy metrics grade a
//! routine:
//!
//! * symbol frequency complexity — entropy of the step frequencies,
//!   at most `log₂4 = 2` bits;
//! * averaged phrase complexity — mean entropy of the consecutive
//!   four-step phrases (trailing partial phrase ignored);
//! * number-of-phrases complexity — entropy of the phrase distribution over
//!   the first twenty steps, at most `log₂5` bits.
//!
//! [`metric_report`] evaluates all of them over a corpus and correlates each
//! row against the judges' mean scores.

mod dataset;
mod io;

pub use dataset::{bundled_corpus, bundled_energies, bundled_scores};
pub use io::{parse_corpus_str, parse_scores_csv};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbols of the first 20 steps form exactly this many full phrases.
const PHRASE_WINDOW: usize = 20;
const PHRASE_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step symbol '{symbol}' at position {position}")]
    BadSymbol { symbol: char, position: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("sequence '{id}' has {len} steps, need at least {need}")]
    TooShort {
        id: String,
        len: usize,
        need: usize,
    },
    #[error("weights must be nonnegative and sum to 1 (got {w_avg} and {w_num})")]
    BadWeights { w_avg: f64, w_num: f64 },
    #[error("inputs must have equal length >= 2 (got {xs} and {ys})")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("zero variance in correlation input")]
    ZeroVariance,
    #[error("per-step costs must be nonnegative")]
    NegativeCost,
    #[error("need at least {need} sequences with independent step counts, got {got}")]
    Underdetermined { need: usize, got: usize },
    #[error("step-count matrix is rank deficient, cannot fit per-step costs")]
    RankDeficientCounts,
    #[error("id mismatch: corpus has '{corpus_id}', table has '{table_id}' at row {row}")]
    MisalignedIds {
        corpus_id: String,
        table_id: String,
        row: usize,
    },
    #[error("{file_kind} line {line}: {message}")]
    Format {
        file_kind: &'static str,
        line: usize,
        message: String,
    },
}

/// One of the four step primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    A,
    B,
    C,
    D,
}

pub const ALPHABET: [Symbol; 4] = [Symbol::A, Symbol::B, Symbol::C, Symbol::D];

impl Symbol {
    pub fn from_char(c: char) -> Option<Symbol> {
        match c.to_ascii_uppercase() {
            'A' => Some(Symbol::A),
            'B' => Some(Symbol::B),
            'C' => Some(Symbol::C),
            'D' => Some(Symbol::D),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::A => 'A',
            Symbol::B => 'B',
            Symbol::C => 'C',
            Symbol::D => 'D',
        }
    }

    fn index(self) -> usize {
        match self {
            Symbol::A => 0,
            Symbol::B => 1,
            Symbol::C => 2,
            Symbol::D => 3,
        }
    }
}

/// An ordered routine over the step alphabet. Canonical corpus routines are
/// 23 steps long; other lengths are accepted wherever a metric generalizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanceSequence {
    symbols: Vec<Symbol>,
    id: Option<String>,
}

impl DanceSequence {
    pub fn new(symbols: Vec<Symbol>, id: Option<String>) -> Self {
        Self { symbols, id }
    }

    /// Parses a routine from text: one symbol per character, whitespace
    /// ignored, case-insensitive. Positions in errors are 1-based and count
    /// non-whitespace characters.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut symbols = Vec::new();
        let mut position = 0usize;
        for c in text.chars() {
            if c.is_whitespace() {
                continue;
            }
            position += 1;
            match Symbol::from_char(c) {
                Some(s) => symbols.push(s),
                None => return Err(Error::BadSymbol { symbol: c, position }),
            }
        }
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { symbols, id: None })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Step counts in alphabet order `A, B, C, D`.
    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for s in &self.symbols {
            counts[s.index()] += 1;
        }
        counts
    }

    fn display_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| "<unnamed>".to_string())
    }
}

impl std::str::FromStr for DanceSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DanceSequence::parse(s)
    }
}

impl std::fmt::Display for DanceSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// A consecutive group of exactly four steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phrase {
    symbols: [Symbol; 4],
}

impl Phrase {
    pub fn new(symbols: [Symbol; 4]) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[Symbol; 4] {
        &self.symbols
    }

    fn counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for s in &self.symbols {
            counts[s.index()] += 1;
        }
        counts
    }
}

/// `−Σ f_k log₂ f_k` over nonzero counts, with `0·log 0 = 0`.
fn entropy_bits(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let f = c as f64 / total as f64;
            -f * f.log2()
        })
        .sum();
    // A lone symbol yields -0.0; keep the sign bit clean.
    h + 0.0
}

/// Entropy of the step relative frequencies; in `[0, 2]` bits, zero exactly
/// when one symbol fills the whole routine.
pub fn symbol_frequency_complexity(seq: &DanceSequence) -> Result<f64, Error> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(entropy_bits(seq.counts(), seq.len()))
}

/// Splits into consecutive non-overlapping four-step phrases; whatever is
/// left (fewer than four steps) is returned as the remainder.
pub fn phrase_decompose(seq: &DanceSequence) -> (Vec<Phrase>, Vec<Symbol>) {
    let mut phrases = Vec::with_capacity(seq.len() / PHRASE_LEN);
    let chunks = seq.symbols.chunks_exact(PHRASE_LEN);
    let remainder = chunks.remainder().to_vec();
    for chunk in chunks {
        phrases.push(Phrase::new([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    (phrases, remainder)
}

/// Entropy of the step distribution within one phrase. Takes one of five
/// values: 0, 0.811278, 1, 1.5 or 2 bits, by the multiset shape of the
/// phrase (all equal / three equal / two pairs / one pair / all distinct).
pub fn phrase_complexity(phrase: &Phrase) -> f64 {
    entropy_bits(phrase.counts(), PHRASE_LEN)
}

/// Mean phrase entropy over the full phrases; the remainder is ignored.
pub fn averaged_phrase_complexity(seq: &DanceSequence) -> Result<f64, Error> {
    let (phrases, _) = phrase_decompose(seq);
    if phrases.is_empty() {
        return Err(Error::TooShort {
            id: seq.display_id(),
            len: seq.len(),
            need: PHRASE_LEN,
        });
    }
    Ok(phrases.iter().map(phrase_complexity).sum::<f64>() / phrases.len() as f64)
}

/// Entropy of the distribution of distinct phrases among the first twenty
/// steps (five phrases); in `[0, log₂5]` bits.
pub fn number_of_phrases_complexity(seq: &DanceSequence) -> Result<f64, Error> {
    if seq.len() < PHRASE_WINDOW {
        return Err(Error::TooShort {
            id: seq.display_id(),
            len: seq.len(),
            need: PHRASE_WINDOW,
        });
    }
    let window = DanceSequence::new(seq.symbols[..PHRASE_WINDOW].to_vec(), None);
    let (phrases, _) = phrase_decompose(&window);
    let mut distinct: Vec<(Phrase, usize)> = Vec::new();
    for p in phrases.iter() {
        match distinct.iter_mut().find(|(q, _)| q == p) {
            Some((_, count)) => *count += 1,
            None => distinct.push((*p, 1)),
        }
    }
    Ok(entropy_bits(
        distinct.iter().map(|&(_, c)| c),
        phrases.len(),
    ))
}

/// Convex combination `w_avg · averaged + w_num · number_of_phrases`.
pub fn combined_complexity(seq: &DanceSequence, w_avg: f64, w_num: f64) -> Result<f64, Error> {
    if w_avg < 0.0 || w_num < 0.0 || (w_avg + w_num - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights { w_avg, w_num });
    }
    Ok(w_avg * averaged_phrase_complexity(seq)? + w_num * number_of_phrases_complexity(seq)?)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, Error> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Per-step energy cost table (centimeters per executed step) plus an
/// optional per-routine constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Costs in alphabet order `A, B, C, D`.
    pub step_costs: [f64; 4],
    pub offset: f64,
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), Error> {
        if self.step_costs.iter().any(|&c| c < 0.0) {
            return Err(Error::NegativeCost);
        }
        Ok(())
    }
}

/// `offset + Σ cost(step)` over the routine.
pub fn total_energy(seq: &DanceSequence, model: &EnergyModel) -> f64 {
    let counts = seq.counts();
    model.offset
        + counts
            .iter()
            .zip(&model.step_costs)
            .map(|(&c, &e)| c as f64 * e)
            .sum::<f64>()
}

/// Least-squares fit of the four per-step costs from routine step counts
/// against measured energies (no offset column: corpus routines all have the
/// same length, which would make it collinear). Returns the model and the
/// RMS residual.
pub fn fit_step_costs(
    corpus: &[DanceSequence],
    energies: &[f64],
) -> Result<(EnergyModel, f64), Error> {
    if corpus.len() != energies.len() {
        return Err(Error::LengthMismatch {
            xs: corpus.len(),
            ys: energies.len(),
        });
    }
    if corpus.len() < 4 {
        return Err(Error::Underdetermined {
            need: 4,
            got: corpus.len(),
        });
    }
    let counts = nalgebra::DMatrix::from_fn(corpus.len(), 4, |i, j| corpus[i].counts()[j] as f64);
    let rhs = nalgebra::DVector::from_column_slice(energies);
    let svd = counts.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_sv.is_nan() || min_sv <= 1e-10 * max_sv {
        return Err(Error::RankDeficientCounts);
    }
    let theta = svd
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::RankDeficientCounts)?;
    let model = EnergyModel {
        step_costs: [theta[0], theta[1], theta[2], theta[3]],
        offset: 0.0,
    };
    let residual = &counts * &theta - &rhs;
    let rms = (residual.norm_squared() / corpus.len() as f64).sqrt();
    Ok((model, rms))
}

/// One row of the judge-score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub id: String,
    pub mean: f64,
    pub std: f64,
}

/// Judges' mean scores and standard deviations, aligned with a corpus by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub entries: Vec<ScoreEntry>,
}

/// Per-routine metric values in the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DanceMetrics {
    pub id: String,
    pub symbol_frequency: f64,
    pub averaged_phrase: f64,
    pub number_of_phrases: f64,
    pub combined: f64,
    pub judges_mean: Option<f64>,
    pub judges_std: Option<f64>,
    pub energy_cm: Option<f64>,
}

/// Correlation of each metric row against the judges' mean scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Correlations {
    pub symbol_frequency: f64,
    pub averaged_phrase: f64,
    pub number_of_phrases: f64,
    pub combined: f64,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedEnergyModel {
    pub step_costs: [f64; 4],
    pub offset: f64,
    pub rms_residual: f64,
}

/// Corpus-level complexity report: per-routine metrics, correlations against
/// the judge scores when available, and the fitted per-step energy model
/// when energies are available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub weights: (f64, f64),
    pub dances: Vec<DanceMetrics>,
    pub correlations: Option<Correlations>,
    pub fitted_energy: Option<FittedEnergyModel>,
}

/// Computes every metric over the corpus and, when scores are present, the
/// correlations of each metric row (and the ingested energy row) against the
/// judges' means. Corpus, scores and energies must align by routine id, in
/// order.
pub fn metric_report(
    corpus: &[DanceSequence],
    scores: Option<&ScoreTable>,
    energies: Option<&[(String, f64)]>,
    weights: (f64, f64),
) -> Result<ComplexityReport, Error> {
    if let Some(table) = scores {
        check_alignment(corpus, table.entries.iter().map(|e| e.id.as_str()))?;
    }
    if let Some(list) = energies {
        check_alignment(corpus, list.iter().map(|(id, _)| id.as_str()))?;
    }

    let mut dances = Vec::with_capacity(corpus.len());
    for (i, seq) in corpus.iter().enumerate() {
        dances.push(DanceMetrics {
            id: seq
                .id()
                .map(str::to_string)
                .unwrap_or_else(|| format!("seq{}", i + 1)),
            symbol_frequency: symbol_frequency_complexity(seq)?,
            averaged_phrase: averaged_phrase_complexity(seq)?,
            number_of_phrases: number_of_phrases_complexity(seq)?,
            combined: combined_complexity(seq, weights.0, weights.1)?,
            judges_mean: scores.map(|t| t.entries[i].mean),
            judges_std: scores.map(|t| t.entries[i].std),
            energy_cm: energies.map(|e| e[i].1),
        });
    }

    let correlations = match scores {
        Some(table) if corpus.len() >= 2 => {
            let means: Vec<f64> = table.entries.iter().map(|e| e.mean).collect();
            let row = |f: fn(&DanceMetrics) -> f64| -> Vec<f64> { dances.iter().map(f).collect() };
            let energy = match energies {
                Some(list) => {
                    let vals: Vec<f64> = list.iter().map(|&(_, e)| e).collect();
                    Some(pearson(&vals, &means)?)
                }
                None => None,
            };
            Some(Correlations {
                symbol_frequency: pearson(&row(|d| d.symbol_frequency), &means)?,
                averaged_phrase: pearson(&row(|d| d.averaged_phrase), &means)?,
                number_of_phrases: pearson(&row(|d| d.number_of_phrases), &means)?,
                combined: pearson(&row(|d| d.combined), &means)?,
                energy,
            })
        }
        _ => None,
    };

    let fitted_energy = match energies {
        Some(list) if corpus.len() >= 4 => {
            let vals: Vec<f64> = list.iter().map(|&(_, e)| e).collect();
            let (model, rms) = fit_step_costs(corpus, &vals)?;
            Some(FittedEnergyModel {
                step_costs: model.step_costs,
                offset: model.offset,
                rms_residual: rms,
            })
        }
        _ => None,
    };

    Ok(ComplexityReport {
        weights,
        dances,
        correlations,
        fitted_energy,
    })
}

fn check_alignment<'a>(
    corpus: &[DanceSequence],
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), Error> {
    let mut row = 0usize;
    let mut table_ids = ids;
    for seq in corpus {
        let table_id = table_ids.next().ok_or(Error::MisalignedIds {
            corpus_id: seq.display_id(),
            table_id: "<missing>".to_string(),
            row,
        })?;
        let corpus_id = seq.display_id();
        if seq.id().is_some() && corpus_id != table_id {
            return Err(Error::MisalignedIds {
                corpus_id,
                table_id: table_id.to_string(),
                row,
            });
        }
        row += 1;
    }
    if let Some(extra) = table_ids.next() {
        return Err(Error::MisalignedIds {
            corpus_id: "<missing>".to_string(),
            table_id: extra.to_string(),
            row,
        });
    }
    Ok(())
}
