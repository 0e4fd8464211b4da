use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::layout::{check_layout, count_crossings, Algorithm, HPLayout, LayoutOptions};
use crate::reconcile::{event_summary, Reconciliation};

use super::IoError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub host: String,
    pub parasite: String,
    /// Name of the mapping drawn (`lca` for the computed one).
    pub gamma: String,
    pub host_nodes: usize,
    pub parasite_nodes: usize,
    /// Generated node names, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synthetic_labels: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub compact_y: bool,
    pub planar_shortcut: bool,
}

impl From<LayoutOptions> for LayoutParams {
    fn from(o: LayoutOptions) -> Self {
        LayoutParams {
            compact_y: o.compact_y,
            planar_shortcut: o.planar_shortcut,
        }
    }
}

/// Everything `layout` writes. Timing is left out unless asked for, so two
/// runs produce identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub instance: InstanceMeta,
    pub algorithm: Algorithm,
    pub params: LayoutParams,
    pub layout: HPLayout,
    pub crossing_count: usize,
    pub events: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl LayoutDocument {
    pub fn new(
        rec: &Reconciliation,
        gamma_name: &str,
        algorithm: Algorithm,
        opts: LayoutOptions,
        layout: HPLayout,
    ) -> Result<Self, IoError> {
        let events = event_summary(rec, &rec.classify_events()?);
        let mut synthetic_labels = Vec::new();
        for t in [rec.host(), rec.parasite()] {
            synthetic_labels.extend(
                t.nodes()
                    .filter(|&v| t.is_synthetic(v))
                    .map(|v| t.label(v).to_string()),
            );
        }
        Ok(LayoutDocument {
            instance: InstanceMeta {
                host: rec.host().to_newick(),
                parasite: rec.parasite().to_newick(),
                gamma: gamma_name.to_string(),
                host_nodes: rec.host().len(),
                parasite_nodes: rec.parasite().len(),
                synthetic_labels,
            },
            algorithm,
            params: opts.into(),
            crossing_count: layout.crossing_count(),
            layout,
            events,
            elapsed_ms: None,
        })
    }

    /// Re-checks the payload against `rec` and the stored count.
    pub fn verify(&self, rec: &Reconciliation) -> Result<(), IoError> {
        let report = check_layout(&self.layout, rec);
        if !report.is_valid() {
            return Err(IoError::InvalidDocument(format!("{:?}", report.violations)));
        }
        let (n, _) = count_crossings(&self.layout);
        if n != self.crossing_count {
            return Err(IoError::InvalidDocument(format!(
                "crossing_count {} but the routes cross {} times",
                self.crossing_count, n
            )));
        }
        Ok(())
    }
}

/// Pretty JSON with object keys sorted at every level and a final newline.
pub fn emit_json(doc: &LayoutDocument) -> String {
    // serde_json's Value keeps keys in a BTreeMap
    let value = serde_json::to_value(doc).expect("document serialises");
    let mut s = serde_json::to_string_pretty(&value).expect("value serialises");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<LayoutDocument, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::tests::rec;
    use crate::layout::{run_algorithm, shorten_host_switch};

    fn doc() -> (LayoutDocument, Reconciliation) {
        let r = rec(
            "((a,b)u,c)r;",
            "((x,y)q1,z)q0;",
            &[("x", "a"), ("y", "c"), ("z", "b")],
            &[("q1", "r"), ("q0", "r")],
        );
        let l = shorten_host_switch(&r, LayoutOptions::default()).unwrap();
        let d = LayoutDocument::new(&r, "g", Algorithm::Shs, LayoutOptions::default(), l).unwrap();
        (d, r)
    }

    #[test]
    fn round_trip_and_bytes() {
        let (d, r) = doc();
        let text = emit_json(&d);
        assert_eq!(text, emit_json(&d));
        let back = parse_json(&text).unwrap();
        assert_eq!(back, d);
        back.verify(&r).unwrap();
        assert!(!text.contains("elapsed_ms"));
    }

    #[test]
    fn coordinates_are_integers() {
        let (d, _) = doc();
        let v: serde_json::Value = serde_json::from_str(&emit_json(&d)).unwrap();
        for r in v["layout"]["rects"].as_object().unwrap().values() {
            for k in ["x_left", "x_right", "y_bottom", "y_top"] {
                assert!(r[k].is_i64(), "{k} not an integer");
            }
        }
        for p in v["layout"]["points"].as_object().unwrap().values() {
            assert!(p["x"].is_i64() && p["y"].is_i64());
        }
    }

    #[test]
    fn keys_sorted() {
        let (d, _) = doc();
        let text = emit_json(&d);
        let a = text.find("\"algorithm\"").unwrap();
        let c = text.find("\"crossing_count\"").unwrap();
        let l = text.find("\"layout\"").unwrap();
        assert!(a < c && c < l);
    }

    #[test]
    fn verify_catches_tampering() {
        let (mut d, r) = doc();
        d.crossing_count += 1;
        assert!(d.verify(&r).is_err());
        let (mut d, r) = doc();
        d.layout = run_algorithm(Algorithm::Smp, &r, LayoutOptions::default()).unwrap();
        d.layout.points.get_mut("x").unwrap().y += 1;
        assert!(d.verify(&r).is_err());
    }
}
