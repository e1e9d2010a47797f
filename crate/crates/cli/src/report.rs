use std::fmt::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub name: String,
    pub anc: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
}

/// Methods ranked by ANC, lowest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub graph: GraphStats,
    pub fraction: f64,
    pub methods: Vec<MethodResult>,
}

/// Standard competition ranks: equal values share the smaller rank.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|w| *w < v).count())
        .collect()
}

impl CompareReport {
    pub fn new(graph: GraphStats, fraction: f64, results: Vec<(String, f64)>) -> Self {
        let values: Vec<f64> = results.iter().map(|(_, a)| *a).collect();
        let ranks = competition_ranks(&values);
        let methods = results
            .into_iter()
            .zip(ranks)
            .map(|((name, anc), rank)| MethodResult { name, anc, rank })
            .collect();
        Self {
            graph,
            fraction,
            methods,
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "graph: {} nodes, {} edges; removal fraction {}\n\n{:<10} {:>9} {:>5}\n",
            self.graph.nodes, self.graph.edges, self.fraction, "method", "ANC", "rank"
        );
        let mut rows: Vec<&MethodResult> = self.methods.iter().collect();
        rows.sort_by_key(|m| m.rank);
        for m in rows {
            let _ = writeln!(out, "{:<10} {:>9.5} {:>5}", m.name, m.anc, m.rank);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_share_the_smaller_rank() {
        assert_eq!(competition_ranks(&[0.5, 0.3, 0.5, 0.9]), vec![2, 1, 2, 4]);
        assert_eq!(competition_ranks(&[0.1]), vec![1]);
    }

    #[test]
    fn table_is_sorted_by_rank() {
        let r = CompareReport::new(
            GraphStats { nodes: 10, edges: 12 },
            0.2,
            vec![("dc".into(), 0.8), ("wn".into(), 0.7)],
        );
        let t = r.to_table();
        assert!(t.find("wn").unwrap() < t.find("dc").unwrap());
        assert!(t.contains("0.70000"));
    }
}
