//! Canonical text format for automata.
//!
//! One JSON document per automaton. The writer is canonical: fields in a
//! fixed order, gram keys sorted with `_` before every alphabet symbol,
//! every float rendered with 17 significant digits, so serializing the
//! same automaton twice yields identical bytes and parsing back loses
//! nothing. The parser is strict: unknown fields, duplicate gram keys,
//! non-canonical accepting lists, and incomplete transition tables are
//! all reported rather than repaired.

use crate::equivalence::DiagonalSumQFA;
use crate::linalg::{C64, CMatrix, CVector};
use crate::model::{Alphabet, KGram, MultiLetterQFA};
use crate::tolerance::Tolerances;
use serde::Deserialize;
use serde::de::{self, MapAccess, Visitor};
use std::collections::HashMap;
use std::fmt;

pub const FORMAT_VERSION: &str = "1";

/// One parse or validation failure, with the document location that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseIssue {
    pub context: String,
    pub message: String,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

/// All failures found in a document; parsing stops only for syntax errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseErrors {
    pub issues: Vec<ParseIssue>,
}

impl ParseErrors {
    fn single(context: &str, message: String) -> Self {
        ParseErrors {
            issues: vec![ParseIssue {
                context: context.to_string(),
                message,
            }],
        }
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

/// Transition entries in document order, duplicates rejected at the
/// deserialization layer.
#[derive(Debug)]
pub struct TransitionEntries(pub Vec<(String, Vec<[f64; 2]>)>);

impl<'de> Deserialize<'de> for TransitionEntries {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: de::Deserializer<'de>,
    {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = TransitionEntries;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from gram keys to row-major complex matrices")
            }

            fn visit_map<A>(self, mut map: A) -> Result<Self::Value, A::Error>
            where
                A: MapAccess<'de>,
            {
                let mut entries: Vec<(String, Vec<[f64; 2]>)> = Vec::new();
                while let Some((key, value)) = map.next_entry::<String, Vec<[f64; 2]>>()? {
                    if entries.iter().any(|(k, _)| *k == key) {
                        return Err(de::Error::custom(format!("duplicate gram key {key:?}")));
                    }
                    entries.push((key, value));
                }
                Ok(TransitionEntries(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionsDoc {
    #[serde(default)]
    pub rho: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub pi: Option<Vec<[f64; 2]>>,
}

/// The document schema. Field meanings match [`MultiLetterQFA`]; the
/// optional extensions block carries the embedded initial vectors of a
/// diagonal-sum document.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfaDocument {
    pub format_version: String,
    pub k: usize,
    pub alphabet: String,
    pub states: usize,
    pub accepting: Vec<usize>,
    pub initial: Vec<[f64; 2]>,
    pub transitions: TransitionEntries,
    #[serde(default)]
    pub extensions: Option<ExtensionsDoc>,
}

/// Embedded component start vectors recovered from a sum document.
#[derive(Debug, Clone)]
pub struct EmbeddedVectors {
    pub rho: Option<CVector>,
    pub pi: Option<CVector>,
}

fn vector_from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_vec(pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
}

/// Parses a document and validates the automaton it describes, reporting
/// every structural and definitional failure it can find.
pub fn parse_qfa_with(
    text: &str,
    tol: &Tolerances,
) -> Result<(MultiLetterQFA, Option<EmbeddedVectors>), ParseErrors> {
    let doc: QfaDocument = serde_json::from_str(text)
        .map_err(|e| ParseErrors::single("document", e.to_string()))?;

    let mut issues = Vec::new();
    let mut push = |context: String, message: String| {
        issues.push(ParseIssue { context, message });
    };

    if doc.format_version != FORMAT_VERSION {
        push(
            "format_version".into(),
            format!("unsupported version {:?}, expected {FORMAT_VERSION:?}", doc.format_version),
        );
    }
    if doc.k == 0 {
        push("k".into(), "window length must be at least 1".into());
    }
    if doc.states == 0 {
        push("states".into(), "state count must be at least 1".into());
    }
    let alphabet = match Alphabet::new(&doc.alphabet) {
        Ok(a) => a,
        Err(e) => {
            push("alphabet".into(), e.to_string());
            return Err(ParseErrors { issues });
        }
    };
    if doc.k == 0 || doc.states == 0 {
        return Err(ParseErrors { issues });
    }

    if !doc.accepting.windows(2).all(|w| w[0] < w[1]) {
        push(
            "accepting".into(),
            "accepting states must be listed in strictly increasing order".into(),
        );
    }

    if doc.initial.len() != doc.states {
        push(
            "initial".into(),
            format!("{} amplitudes for {} states", doc.initial.len(), doc.states),
        );
    }
    if doc.initial.iter().flatten().any(|x| !x.is_finite()) {
        push("initial".into(), "non-finite amplitude".into());
    }

    let mut table: HashMap<KGram, CMatrix> = HashMap::new();
    let expected_entries = doc.states * doc.states;
    for (key, pairs) in &doc.transitions.0 {
        let context = format!("transitions.{key}");
        let gram = match KGram::parse(key, doc.k, &alphabet) {
            Ok(g) => g,
            Err(_) => {
                push(context, format!("not a usable gram for k={}", doc.k));
                continue;
            }
        };
        if pairs.len() != expected_entries {
            push(
                context,
                format!("{} entries for a {n}x{n} matrix", pairs.len(), n = doc.states),
            );
            continue;
        }
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            push(context, "non-finite matrix entry".into());
            continue;
        }
        let data: Vec<C64> = pairs.iter().map(|p| C64::new(p[0], p[1])).collect();
        table.insert(gram, CMatrix::from_row_major(doc.states, data));
    }

    let embedded = match &doc.extensions {
        None => None,
        Some(ext) => {
            let mut read_vector = |name: &str, pairs: &Option<Vec<[f64; 2]>>| -> Option<CVector> {
                let pairs = pairs.as_ref()?;
                if pairs.len() != doc.states {
                    push(
                        format!("extensions.{name}"),
                        format!("{} amplitudes for {} states", pairs.len(), doc.states),
                    );
                    return None;
                }
                if pairs.iter().flatten().any(|x| !x.is_finite()) {
                    push(format!("extensions.{name}"), "non-finite amplitude".into());
                    return None;
                }
                Some(vector_from_pairs(pairs))
            };
            Some(EmbeddedVectors {
                rho: read_vector("rho", &ext.rho),
                pi: read_vector("pi", &ext.pi),
            })
        }
    };

    if !issues.is_empty() {
        return Err(ParseErrors { issues });
    }

    let qfa = MultiLetterQFA {
        k: doc.k,
        alphabet,
        n: doc.states,
        accepting: doc.accepting.iter().copied().collect(),
        initial: vector_from_pairs(&doc.initial),
        table,
    };

    let report = qfa.validate(tol);
    if !report.is_valid() {
        return Err(ParseErrors {
            issues: report
                .violations
                .iter()
                .map(|v| ParseIssue {
                    context: "automaton".into(),
                    message: v.to_string(),
                })
                .collect(),
        });
    }

    Ok((qfa, embedded))
}

/// [`parse_qfa_with`] at default tolerances, dropping any extensions.
pub fn parse_qfa(text: &str) -> Result<MultiLetterQFA, ParseErrors> {
    parse_qfa_with(text, &Tolerances::default()).map(|(qfa, _)| qfa)
}

fn fmt_float(x: f64) -> String {
    // 17 significant digits: lossless for an IEEE-754 double.
    format!("{x:.16e}")
}

fn fmt_pair(z: C64) -> String {
    format!("[{}, {}]", fmt_float(z.re), fmt_float(z.im))
}

fn fmt_amplitudes(v: &CVector) -> String {
    let pairs: Vec<String> = v.amps().iter().map(|&z| fmt_pair(z)).collect();
    format!("[{}]", pairs.join(", "))
}

fn fmt_matrix(m: &CMatrix) -> String {
    let pairs: Vec<String> = m.entries().iter().map(|&z| fmt_pair(z)).collect();
    format!("[{}]", pairs.join(", "))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_document(a: &MultiLetterQFA, embedded: Option<(&CVector, &CVector)>) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format_version\": {},\n", json_string(FORMAT_VERSION)));
    out.push_str(&format!("  \"k\": {},\n", a.k));
    out.push_str(&format!("  \"alphabet\": {},\n", json_string(&a.alphabet.as_string())));
    out.push_str(&format!("  \"states\": {},\n", a.n));
    let accepting: Vec<String> = a.accepting.iter().map(|q| q.to_string()).collect();
    out.push_str(&format!("  \"accepting\": [{}],\n", accepting.join(", ")));
    out.push_str(&format!("  \"initial\": {},\n", fmt_amplitudes(&a.initial)));
    out.push_str("  \"transitions\": {\n");
    let mut keys: Vec<&KGram> = a.table.keys().collect();
    keys.sort_by(|x, y| a.alphabet.cmp_gram_keys(x.as_str(), y.as_str()));
    for (i, key) in keys.iter().enumerate() {
        let sep = if i + 1 == keys.len() { "" } else { "," };
        out.push_str(&format!(
            "    {}: {}{sep}\n",
            json_string(key.as_str()),
            fmt_matrix(&a.table[*key])
        ));
    }
    match embedded {
        None => out.push_str("  }\n"),
        Some((rho, pi)) => {
            out.push_str("  },\n");
            out.push_str("  \"extensions\": {\n");
            out.push_str(&format!("    \"rho\": {},\n", fmt_amplitudes(rho)));
            out.push_str(&format!("    \"pi\": {}\n", fmt_amplitudes(pi)));
            out.push_str("  }\n");
        }
    }
    out.push_str("}\n");
    out
}

/// Canonical serialization; byte-identical for identical automata.
pub fn serialize_qfa(a: &MultiLetterQFA) -> String {
    write_document(a, None)
}

/// Serializes a diagonal sum with its embedded start vectors recorded in
/// the extensions block. The document's own initial vector is `rho`.
pub fn serialize_sum(sum: &DiagonalSumQFA) -> String {
    write_document(&sum.qfa, Some((&sum.rho, &sum.pi)))
}
