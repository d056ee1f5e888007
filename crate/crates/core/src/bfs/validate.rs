use serde::{Deserialize, Serialize};

use super::{BfsOutput, UNREACHED};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Output arrays do not have one entry per vertex.
    Length {
        distances: usize,
        parents: usize,
        n: u64,
    },
    SourceDistance {
        source: u64,
        distance: u64,
    },
    SourceParent {
        source: u64,
        parent: u64,
    },
    /// `(parent, v)` is not an edge of the graph.
    NonEdgeParent {
        vertex: u64,
        parent: u64,
    },
    /// The parent's level is not exactly one less.
    LevelGap {
        vertex: u64,
        parent: u64,
        vertex_level: u64,
        parent_level: u64,
    },
    /// Reached vertex (other than the source) without a parent.
    MissingParent {
        vertex: u64,
    },
    /// Unreached vertex carrying a parent.
    UnexpectedParent {
        vertex: u64,
        parent: u64,
    },
    /// An edge whose endpoint levels differ by more than one, or that joins
    /// a reached vertex to an unreached one.
    EdgeSpansLevels {
        u: u64,
        v: u64,
        u_level: u64,
        v_level: u64,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Length { .. } => "length",
            Violation::SourceDistance { .. } => "source_distance",
            Violation::SourceParent { .. } => "source_parent",
            Violation::NonEdgeParent { .. } => "non_edge_parent",
            Violation::LevelGap { .. } => "level_gap",
            Violation::MissingParent { .. } => "missing_parent",
            Violation::UnexpectedParent { .. } => "unexpected_parent",
            Violation::EdgeSpansLevels { .. } => "edge_spans_levels",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub source: u64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations.iter().filter(|v| v.kind() == kind).count()
    }
}

/// Checks a search result against the whole graph `g`: tree edges exist,
/// tree edges step exactly one level, parents are present exactly for the
/// reached vertices, the source sits at level 0, and no graph edge spans
/// more than one level. All violations are collected.
pub fn validate_bfs_tree(g: &CsrGraph, s: u64, out: &BfsOutput) -> Result<ValidationReport> {
    if !g.is_whole() {
        return Err(Error::Contract("validation needs the whole graph".into()));
    }
    let n = g.n_global;
    let mut violations = Vec::new();
    if out.distances.len() as u64 != n || out.parents.len() as u64 != n {
        violations.push(Violation::Length {
            distances: out.distances.len(),
            parents: out.parents.len(),
            n,
        });
        return Ok(ValidationReport {
            source: s,
            violations,
        });
    }
    if s >= n {
        return Err(Error::Contract(format!("source {s} outside [0, {n})")));
    }
    let (d, pi) = (&out.distances, &out.parents);
    if d[s as usize] != 0 {
        violations.push(Violation::SourceDistance {
            source: s,
            distance: d[s as usize],
        });
    }
    if pi[s as usize] != s {
        violations.push(Violation::SourceParent {
            source: s,
            parent: pi[s as usize],
        });
    }
    for v in 0..n {
        if v == s {
            continue;
        }
        let (dv, pv) = (d[v as usize], pi[v as usize]);
        match (dv == UNREACHED, pv == UNREACHED) {
            (true, true) => {}
            (true, false) => violations.push(Violation::UnexpectedParent {
                vertex: v,
                parent: pv,
            }),
            (false, true) => violations.push(Violation::MissingParent { vertex: v }),
            (false, false) => {
                if pv >= n || !g.has_edge(pv, v) {
                    violations.push(Violation::NonEdgeParent {
                        vertex: v,
                        parent: pv,
                    });
                } else if d[pv as usize] == UNREACHED || d[pv as usize] + 1 != dv {
                    violations.push(Violation::LevelGap {
                        vertex: v,
                        parent: pv,
                        vertex_level: dv,
                        parent_level: d[pv as usize],
                    });
                }
            }
        }
    }
    for u in 0..n {
        let du = d[u as usize];
        for &v in g.neighbors(u) {
            let dv = d[v as usize];
            if u >= v && g.has_edge(v, u) {
                continue;
            }
            let bad = match (du == UNREACHED, dv == UNREACHED) {
                (true, true) => false,
                (false, false) => du.abs_diff(dv) > 1,
                _ => true,
            };
            if bad {
                violations.push(Violation::EdgeSpansLevels {
                    u,
                    v,
                    u_level: du,
                    v_level: dv,
                });
            }
        }
    }
    Ok(ValidationReport {
        source: s,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{bfs_serial, tests::path3};
    use super::*;
    use crate::graph::{build_csr_1d, rmat_generate, symmetrize, RmatParams};

    fn rmat() -> CsrGraph {
        let g = symmetrize(&rmat_generate(&RmatParams::graph500(8, 8), 11).unwrap());
        build_csr_1d(&g, 0, 1).unwrap()
    }

    #[test]
    fn serial_output_is_valid() {
        let g = rmat();
        for s in [0, 5, 100] {
            let out = bfs_serial(&g, s).unwrap();
            assert!(validate_bfs_tree(&g, s, &out).unwrap().is_valid());
        }
    }

    #[test]
    fn non_neighbor_parent_detected() {
        let g = path3();
        let mut out = bfs_serial(&g, 0).unwrap();
        out.parents[2] = 0;
        let r = validate_bfs_tree(&g, 0, &out).unwrap();
        assert_eq!(
            r.violations,
            vec![Violation::NonEdgeParent {
                vertex: 2,
                parent: 0
            }]
        );
    }

    #[test]
    fn level_gap_detected() {
        let g = path3();
        let mut out = bfs_serial(&g, 0).unwrap();
        out.distances[2] = 3;
        let r = validate_bfs_tree(&g, 0, &out).unwrap();
        assert_eq!(r.count("level_gap"), 1);
        assert_eq!(r.count("edge_spans_levels"), 1);
    }

    #[test]
    fn missing_and_unexpected_parents_detected() {
        let g = path3();
        let mut out = bfs_serial(&g, 0).unwrap();
        out.parents[1] = UNREACHED;
        let r = validate_bfs_tree(&g, 0, &out).unwrap();
        assert_eq!(r.violations, vec![Violation::MissingParent { vertex: 1 }]);

        let mut out = bfs_serial(&g, 0).unwrap();
        out.distances[2] = UNREACHED;
        let r = validate_bfs_tree(&g, 0, &out).unwrap();
        assert_eq!(r.count("unexpected_parent"), 1);
        assert_eq!(r.count("edge_spans_levels"), 1);
    }

    #[test]
    fn wrong_source_distance_detected() {
        let g = path3();
        let mut out = bfs_serial(&g, 0).unwrap();
        out.distances[0] = 1;
        let r = validate_bfs_tree(&g, 0, &out).unwrap();
        assert_eq!(r.count("source_distance"), 1);
    }

    #[test]
    fn truncated_output_reported() {
        let g = path3();
        let mut out = bfs_serial(&g, 0).unwrap();
        out.parents.pop();
        assert_eq!(validate_bfs_tree(&g, 0, &out).unwrap().count("length"), 1);
    }
}
