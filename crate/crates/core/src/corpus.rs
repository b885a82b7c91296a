//! Tokenization, vocabulary construction, corpus ingestion, splitting, and
//! lossless (de)serialization of token-id data.
//!
//! File formats:
//! - Text corpus: UTF-8, one sentence per line.
//! - Token-id corpus: one sentence per line, ASCII decimal ids separated by
//!   single spaces, newline-terminated, no trailing spaces.
//! - Vocabulary: one token per line; the 0-based line number is the id; the
//!   first two lines are the start and end markers.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

pub type TokenId = u32;

pub const START_TOKEN: &str = "<s>";
pub const END_TOKEN: &str = "</s>";

/// How raw text lines are turned into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizePolicy {
    Whitespace,
    WhitespaceLowercase,
}

impl TokenizePolicy {
    pub fn label(&self) -> &'static str {
        match self {
            TokenizePolicy::Whitespace => "ws",
            TokenizePolicy::WhitespaceLowercase => "ws_lower",
        }
    }
}

impl FromStr for TokenizePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ws" | "whitespace" => Ok(TokenizePolicy::Whitespace),
            "ws_lower" | "whitespace_lowercase" | "lowercase" => {
                Ok(TokenizePolicy::WhitespaceLowercase)
            }
            other => Err(Error::Config(format!("unknown tokenization policy `{other}`"))),
        }
    }
}

/// Provenance tag for a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Test,
    Generated,
    Oracle,
}

impl SplitTag {
    pub fn label(&self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
            SplitTag::Generated => "generated",
            SplitTag::Oracle => "oracle",
        }
    }
}

/// Whether sentences have a fixed length (synthetic protocol) or end with an
/// implicit end-marker transition (real-data protocol).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthMode {
    Fixed,
    EndTerminated,
}

impl LengthMode {
    pub fn label(&self) -> &'static str {
        match self {
            LengthMode::Fixed => "fixed",
            LengthMode::EndTerminated => "end",
        }
    }
}

/// Bijection between surface tokens and dense integer ids.
///
/// Ids are contiguous in `[0, N)`; ids 0 and 1 are reserved for the start
/// and end markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, TokenId>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    pub const START: TokenId = 0;
    pub const END: TokenId = 1;

    /// Builds a vocabulary from an ordered token list. The first two entries
    /// must be the reserved markers and tokens must be unique.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[0] != START_TOKEN || tokens[1] != END_TOKEN {
            return Err(Error::Ingest(format!(
                "vocabulary must begin with the reserved markers {START_TOKEN} and {END_TOKEN}"
            )));
        }
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (id, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(Error::Ingest(format!("empty token at id {id}")));
            }
            if token_to_id.insert(token.clone(), id as TokenId).is_some() {
                return Err(Error::Ingest(format!("duplicate token `{token}`")));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token: tokens,
        })
    }

    /// Vocabulary of a given size with generated surface forms, used for
    /// synthetic-oracle experiments where ids are the only identity.
    pub fn synthetic(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!(
                "synthetic vocabulary needs size >= 2, got {size}"
            )));
        }
        let mut tokens = Vec::with_capacity(size);
        tokens.push(START_TOKEN.to_string());
        tokens.push(END_TOKEN.to_string());
        for id in 2..size {
            tokens.push(format!("w{id}"));
        }
        Vocabulary::from_tokens(tokens)
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for token in &self.id_to_token {
            out.push_str(token);
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: "empty vocabulary file".into(),
            });
        }
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        Vocabulary::from_tokens(tokens).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Content hash over the ordered token list.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for token in &self.id_to_token {
            hasher.update(token.as_bytes());
            hasher.update([0u8]);
        }
        short_hex(&hasher.finalize())
    }
}

fn short_hex(digest: &[u8]) -> String {
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Splits a line into surface tokens. Deterministic; never yields empty
/// tokens; an empty or all-whitespace line yields an empty list.
pub fn tokenize(line: &str, policy: TokenizePolicy) -> Vec<String> {
    match policy {
        TokenizePolicy::Whitespace => line.split_whitespace().map(str::to_string).collect(),
        TokenizePolicy::WhitespaceLowercase => line
            .split_whitespace()
            .map(|t| t.to_lowercase())
            .collect(),
    }
}

/// Builds a vocabulary over every token with frequency >= `min_count`, plus
/// the reserved markers. Ids are assigned frequency-descending with
/// lexicographic tie-break, so the assignment is reproducible and
/// insensitive to sentence order.
pub fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], min_count: u64) -> Result<Vocabulary> {
    if sentences.is_empty() {
        return Err(Error::Ingest("empty corpus source".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sentence in sentences {
        for token in sentence {
            let token = token.as_ref();
            if token == START_TOKEN || token == END_TOKEN {
                return Err(Error::Ingest(format!(
                    "reserved marker `{token}` appears in the corpus"
                )));
            }
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens = Vec::with_capacity(ranked.len() + 2);
    tokens.push(START_TOKEN.to_string());
    tokens.push(END_TOKEN.to_string());
    tokens.extend(ranked.into_iter().map(|(t, _)| t.to_string()));
    Vocabulary::from_tokens(tokens)
}

/// Encodes surface tokens to ids; unknown tokens are a hard error.
pub fn encode<S: AsRef<str>>(vocab: &Vocabulary, tokens: &[S]) -> Result<Vec<TokenId>> {
    tokens
        .iter()
        .map(|t| {
            vocab
                .id(t.as_ref())
                .ok_or_else(|| Error::Oov(t.as_ref().to_string()))
        })
        .collect()
}

/// Decodes ids back to surface tokens; out-of-range ids are a hard error.
pub fn decode(vocab: &Vocabulary, ids: &[TokenId]) -> Result<Vec<String>> {
    ids.iter()
        .map(|&id| {
            vocab
                .token(id)
                .map(str::to_string)
                .ok_or(Error::IdRange {
                    id,
                    size: vocab.size(),
                })
        })
        .collect()
}

/// An ordered collection of token-id sequences plus provenance. Immutable
/// after construction and safely shareable across threads.
#[derive(Debug, Clone)]
pub struct Corpus {
    sequences: Vec<Vec<TokenId>>,
    vocab: Arc<Vocabulary>,
    split: SplitTag,
    policy: Option<TokenizePolicy>,
    length_mode: LengthMode,
    source: Option<PathBuf>,
}

impl Corpus {
    pub fn new(
        sequences: Vec<Vec<TokenId>>,
        vocab: Arc<Vocabulary>,
        split: SplitTag,
        length_mode: LengthMode,
    ) -> Result<Self> {
        let size = vocab.size();
        for sequence in &sequences {
            for &id in sequence {
                if id as usize >= size {
                    return Err(Error::IdRange { id, size });
                }
            }
        }
        Ok(Corpus {
            sequences,
            vocab,
            split,
            policy: None,
            length_mode,
            source: None,
        })
    }

    pub fn with_policy(mut self, policy: TokenizePolicy) -> Self {
        self.policy = Some(policy);
        self
    }

    pub fn with_source(mut self, source: impl Into<PathBuf>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn sequences(&self) -> &[Vec<TokenId>] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn split_tag(&self) -> SplitTag {
        self.split
    }

    pub fn policy(&self) -> Option<TokenizePolicy> {
        self.policy
    }

    pub fn length_mode(&self) -> LengthMode {
        self.length_mode
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn max_sentence_len(&self) -> usize {
        self.sequences.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// First `n` sentences as a new corpus with the same provenance.
    pub fn prefix(&self, n: usize) -> Corpus {
        let mut out = self.clone();
        out.sequences.truncate(n);
        out
    }

    /// Content hash over sequences, vocabulary, and mode flags.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.vocab.fingerprint().as_bytes());
        hasher.update([match self.length_mode {
            LengthMode::Fixed => 0u8,
            LengthMode::EndTerminated => 1u8,
        }]);
        hasher.update((self.sequences.len() as u64).to_le_bytes());
        for sequence in &self.sequences {
            hasher.update((sequence.len() as u64).to_le_bytes());
            for &id in sequence {
                hasher.update(id.to_le_bytes());
            }
        }
        short_hex(&hasher.finalize())
    }

    pub fn describe(&self) -> String {
        format!(
            "corpus{{n={},vocab={},split={},policy={},mode={},hash={}}}",
            self.len(),
            self.vocab.size(),
            self.split.label(),
            self.policy.map(|p| p.label()).unwrap_or("ids"),
            self.length_mode.label(),
            self.fingerprint()
        )
    }
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Reads a UTF-8 text corpus (one sentence per line) and tokenizes it.
/// Blank lines are skipped.
pub fn read_token_lines(path: &Path, policy: TokenizePolicy) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let sentences: Vec<Vec<String>> = text
        .lines()
        .map(|line| tokenize(line, policy))
        .filter(|tokens| !tokens.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(Error::Ingest(format!(
            "no sentences found in {}",
            path.display()
        )));
    }
    Ok(sentences)
}

/// Full text-ingestion pipeline: tokenize, build the vocabulary, encode.
/// The returned corpus is end-terminated and tagged `train` (it is the pool
/// a later `split` partitions).
pub fn ingest_text(path: &Path, policy: TokenizePolicy, min_count: u64) -> Result<Corpus> {
    let sentences = read_token_lines(path, policy)?;
    let vocab = Arc::new(build_vocab(&sentences, min_count)?);
    let sequences = sentences
        .iter()
        .map(|s| encode(&vocab, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(
        Corpus::new(sequences, vocab, SplitTag::Train, LengthMode::EndTerminated)?
            .with_policy(policy)
            .with_source(path),
    )
}

/// Seeded disjoint partition. `|train| = round(ratio * |corpus|)`; relative
/// sentence order is preserved within each side.
pub fn split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::Ingest("cannot split an empty corpus".into()));
    }
    let m = corpus.len();
    let n_train = (ratio * m as f64).round() as usize;
    let mut indices: Vec<usize> = (0..m).collect();
    rng::shuffle(&mut indices, &mut rng::stream(seed));
    let mut train_indices = indices[..n_train].to_vec();
    let mut test_indices = indices[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    let pick = |take: &[usize], tag: SplitTag| -> Result<Corpus> {
        let sequences = take
            .iter()
            .map(|&i| corpus.sequences[i].clone())
            .collect();
        let mut side = Corpus::new(sequences, corpus.vocab.clone(), tag, corpus.length_mode)?;
        side.policy = corpus.policy;
        side.source = corpus.source.clone();
        Ok(side)
    };
    Ok((
        pick(&train_indices, SplitTag::Train)?,
        pick(&test_indices, SplitTag::Test)?,
    ))
}

/// Writes a corpus in the token-id format.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for sequence in &corpus.sequences {
        let mut first = true;
        for &id in sequence {
            if !first {
                out.write_all(b" ").map_err(|e| Error::io(path, e))?;
            }
            out.write_all(id.to_string().as_bytes())
                .map_err(|e| Error::io(path, e))?;
            first = false;
        }
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a corpus in the token-id format, validating every id against the
/// vocabulary. Parse errors carry 1-based line numbers.
pub fn load_corpus(
    path: &Path,
    vocab: Arc<Vocabulary>,
    split: SplitTag,
    length_mode: LengthMode,
) -> Result<Corpus> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.is_empty() {
        return Err(Error::Ingest(format!("empty corpus file {}", path.display())));
    }
    let size = vocab.size();
    let mut sequences = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if line.is_empty() {
            sequences.push(Vec::new());
            continue;
        }
        let mut sequence = Vec::new();
        for field in line.split(' ') {
            if field.is_empty() {
                return Err(parse_err("empty field (doubled or trailing space)".into()));
            }
            let id: TokenId = field
                .parse()
                .map_err(|_| parse_err(format!("non-integer field `{field}`")))?;
            if id as usize >= size {
                return Err(parse_err(format!(
                    "token id {id} out of range for vocabulary of size {size}"
                )));
            }
            sequence.push(id);
        }
        sequences.push(sequence);
    }
    Ok(Corpus::new(sequences, vocab, split, length_mode)?.with_source(path))
}
