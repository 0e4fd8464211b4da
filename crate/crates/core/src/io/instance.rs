//! Plain-text instance files.
//!
//! ```text
//! #HOST
//! ((a,b)u,c)r;
//! #PARASITE
//! ((x,y)q1,z)q0;
//! #LEAFMAP
//! x a
//! y b
//! z c
//! #GAMMA first
//! q0 r
//! q1 u
//! ```
//!
//! Newick text may span several lines. `#GAMMA` may repeat with distinct
//! names; leaves not listed under a `#GAMMA` default to their leaf-map image.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::reconcile::{resolve_phi, Reconciliation};
use crate::tree::{parse_newick_with, NewickOptions, NodeId, PhyloTree};

use super::IoError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGamma {
    pub name: String,
    /// Host of every parasite node, indexed by parasite id.
    pub gamma: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct CophyInstance {
    pub host: Arc<PhyloTree>,
    pub parasite: Arc<PhyloTree>,
    pub phi: Vec<Option<NodeId>>,
    pub gammas: Vec<NamedGamma>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Name unlabeled internal nodes instead of rejecting them.
    pub auto_label_internal: bool,
}

/// Lines tagged with their 1-based line number.
type Lines = Vec<(usize, String)>;

#[derive(Default)]
struct Sections {
    host: Option<(usize, String)>,
    parasite: Option<(usize, String)>,
    leafmap: Option<Lines>,
    gammas: Vec<(usize, String, Lines)>,
}

enum Current {
    None,
    Host,
    Parasite,
    LeafMap,
    Gamma,
}

fn pair(line: usize, text: &str) -> Result<(String, String), IoError> {
    let mut it = text.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a.to_string(), b.to_string())),
        _ => Err(IoError::BadLine {
            line,
            text: text.to_string(),
        }),
    }
}

pub fn parse_instance(text: &str) -> Result<CophyInstance, IoError> {
    parse_instance_with(text, ParseOptions::default())
}

pub fn parse_instance_with(text: &str, opts: ParseOptions) -> Result<CophyInstance, IoError> {
    let mut s = Sections::default();
    let mut cur = Current::None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(head) = t.strip_prefix('#') {
            let mut words = head.split_whitespace();
            let tag = words.next().unwrap_or("");
            let rest: Vec<&str> = words.collect();
            let dup = |name: &str| IoError::DuplicateSection(name.to_string());
            cur = match (tag, rest.as_slice()) {
                ("HOST", []) => {
                    if s.host.replace((line, String::new())).is_some() {
                        return Err(dup("HOST"));
                    }
                    Current::Host
                }
                ("PARASITE", []) => {
                    if s.parasite.replace((line, String::new())).is_some() {
                        return Err(dup("PARASITE"));
                    }
                    Current::Parasite
                }
                ("LEAFMAP", []) => {
                    if s.leafmap.replace(Vec::new()).is_some() {
                        return Err(dup("LEAFMAP"));
                    }
                    Current::LeafMap
                }
                ("GAMMA", [name]) => {
                    if s.gammas.iter().any(|g| g.1 == *name) {
                        return Err(IoError::DuplicateGamma(name.to_string()));
                    }
                    s.gammas.push((line, name.to_string(), Vec::new()));
                    Current::Gamma
                }
                _ => {
                    return Err(IoError::BadLine {
                        line,
                        text: t.to_string(),
                    })
                }
            };
            continue;
        }
        match cur {
            Current::None => {
                return Err(IoError::BadLine {
                    line,
                    text: t.to_string(),
                })
            }
            Current::Host => s.host.as_mut().expect("open").1.push_str(t),
            Current::Parasite => s.parasite.as_mut().expect("open").1.push_str(t),
            Current::LeafMap => s
                .leafmap
                .as_mut()
                .expect("open")
                .push((line, t.to_string())),
            Current::Gamma => s
                .gammas
                .last_mut()
                .expect("open")
                .2
                .push((line, t.to_string())),
        }
    }

    let nopts = NewickOptions {
        auto_label_internal: opts.auto_label_internal,
    };
    let (_, host_text) = s.host.ok_or(IoError::MissingSection("HOST"))?;
    let (_, par_text) = s.parasite.ok_or(IoError::MissingSection("PARASITE"))?;
    let leafmap = s.leafmap.ok_or(IoError::MissingSection("LEAFMAP"))?;
    let host = Arc::new(
        parse_newick_with(&host_text, nopts).map_err(|e| IoError::Newick {
            section: "HOST",
            source: e,
        })?,
    );
    let parasite = Arc::new(
        parse_newick_with(&par_text, nopts).map_err(|e| IoError::Newick {
            section: "PARASITE",
            source: e,
        })?,
    );
    let phi_pairs = leafmap
        .iter()
        .map(|(l, t)| pair(*l, t))
        .collect::<Result<Vec<_>, _>>()?;
    let phi = resolve_phi(&host, &parasite, &phi_pairs)?;

    let mut gammas = Vec::new();
    for (_, name, lines) in s.gammas {
        let pairs = lines
            .iter()
            .map(|(l, t)| pair(*l, t))
            .collect::<Result<Vec<_>, _>>()?;
        let rec = Reconciliation::from_labels(host.clone(), parasite.clone(), &phi_pairs, &pairs)
            .map_err(|e| IoError::Gamma {
            name: name.clone(),
            source: e,
        })?;
        gammas.push(NamedGamma {
            name,
            gamma: rec.gamma_vec().to_vec(),
        });
    }
    Ok(CophyInstance {
        host,
        parasite,
        phi,
        gammas,
    })
}

impl CophyInstance {
    /// Instance holding `rec`'s trees, leaf map and (under `name`) its mapping.
    pub fn from_reconciliation(rec: &Reconciliation, name: &str) -> Self {
        CophyInstance {
            host: rec.host_arc().clone(),
            parasite: rec.parasite_arc().clone(),
            phi: rec.phi_vec().to_vec(),
            gammas: vec![NamedGamma {
                name: name.to_string(),
                gamma: rec.gamma_vec().to_vec(),
            }],
        }
    }

    pub fn gamma_index(&self, name: &str) -> Option<usize> {
        self.gammas.iter().position(|g| g.name == name)
    }

    pub fn reconciliation(&self, index: usize) -> Result<Reconciliation, IoError> {
        let g = self
            .gammas
            .get(index)
            .ok_or_else(|| IoError::UnknownGamma(index.to_string()))?;
        Ok(Reconciliation::new(
            self.host.clone(),
            self.parasite.clone(),
            self.phi.clone(),
            g.gamma.clone(),
        )?)
    }

    pub fn lca_reconciliation(&self) -> Result<Reconciliation, IoError> {
        Ok(Reconciliation::lca_mapping(
            self.host.clone(),
            self.parasite.clone(),
            self.phi.clone(),
        )?)
    }

    /// Serialises back to the section format. Only internal nodes are
    /// listed under `#GAMMA`; leaves follow the leaf map.
    pub fn to_text(&self) -> String {
        let p = &*self.parasite;
        let h = &*self.host;
        let mut out = String::new();
        let _ = writeln!(out, "#HOST\n{}", h.to_newick());
        let _ = writeln!(out, "#PARASITE\n{}", p.to_newick());
        out.push_str("#LEAFMAP\n");
        for &v in p.preorder() {
            if let Some(hl) = self.phi[v.0] {
                let _ = writeln!(out, "{} {}", p.label(v), h.label(hl));
            }
        }
        for g in &self.gammas {
            let _ = writeln!(out, "#GAMMA {}", g.name);
            for &v in p.preorder() {
                if !p.is_leaf(v) {
                    let _ = writeln!(out, "{} {}", p.label(v), h.label(g.gamma[v.0]));
                }
            }
        }
        out
    }

    /// Labels that were generated rather than read.
    pub fn synthetic_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in [&self.host, &self.parasite] {
            out.extend(
                t.nodes()
                    .filter(|&v| t.is_synthetic(v))
                    .map(|v| t.label(v).to_string()),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconcile::ReconError;

    const SAMPLE: &str = "#HOST\n((a,b)u,c)r;\n#PARASITE\n((x,y)q1,z)q0;\n#LEAFMAP\nx a\ny b\nz c\n#GAMMA first\nq0 r\nq1 u\n";

    #[test]
    fn minimal_file() {
        let inst = parse_instance("#HOST\na;\n#PARASITE\nx;\n#LEAFMAP\nx a\n").unwrap();
        assert!(inst.gammas.is_empty());
        let r = inst.lca_reconciliation().unwrap();
        assert!(r.validate().is_valid());
    }

    #[test]
    fn round_trip() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.to_text(), SAMPLE);
        let again = parse_instance(&inst.to_text()).unwrap();
        assert_eq!(again.gammas, inst.gammas);
    }

    #[test]
    fn newick_may_span_lines() {
        let text = "#HOST\n((a,b)u,\n c)r;\n#PARASITE\nx;\n#LEAFMAP\nx a\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.host.len(), 5);
    }

    #[test]
    fn leafmap_onto_internal_host_fails() {
        let text = "#HOST\n(a,b)u;\n#PARASITE\nx;\n#LEAFMAP\nx u\n";
        assert!(matches!(
            parse_instance(text),
            Err(IoError::Reconciliation(ReconError::PhiNotLeaf { .. }))
        ));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_instance("#HOST\na;\n#LEAFMAP\nx a\n"),
            Err(IoError::MissingSection("PARASITE"))
        ));
        assert!(matches!(
            parse_instance("#HOST\na;\n#PARASITE\nx;\n#LEAFMAP\nx zz\n"),
            Err(IoError::Reconciliation(ReconError::UnknownHost(_)))
        ));
        assert!(matches!(
            parse_instance("#HOST\na;\n#PARASITE\nx;\n#LEAFMAP\nx a extra\n"),
            Err(IoError::BadLine { line: 6, .. })
        ));
        let two = format!("{SAMPLE}#GAMMA first\nq1 r\nq0 r\n");
        assert!(matches!(
            parse_instance(&two),
            Err(IoError::DuplicateGamma(_))
        ));
        let bad = SAMPLE.replace("q1 u", "q1 nowhere");
        assert!(matches!(parse_instance(&bad), Err(IoError::Gamma { .. })));
        assert!(matches!(
            parse_instance("stray\n#HOST\na;\n"),
            Err(IoError::BadLine { line: 1, .. })
        ));
    }

    #[test]
    fn auto_labels_are_reported() {
        let text = "#HOST\n((a,b),c)r;\n#PARASITE\nx;\n#LEAFMAP\nx a\n";
        assert!(parse_instance(text).is_err());
        let inst = parse_instance_with(
            text,
            ParseOptions {
                auto_label_internal: true,
            },
        )
        .unwrap();
        assert_eq!(inst.synthetic_labels().len(), 1);
    }
}
