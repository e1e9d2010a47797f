use crate::dsl::{parse, ScoreExpr};

/// Hand-designed starting programs, one per initial population: six
/// topology metrics, then k-core, degree-discounted-by-clustering,
/// collective-influence and mixed-centrality variants.
pub const INITIAL_FUNCTIONS: [&str; 10] = [
    "degree",
    "khop(2)",
    "betweenness",
    "closeness",
    "eigenvector",
    "pagerank",
    "coreness + 0.001 * degree",
    "degree * (1 - clustering)",
    "(degree - 1) * nsum(degree - 1)",
    "normalize(degree) + normalize(pagerank)",
];

pub fn initial_functions() -> Vec<ScoreExpr> {
    INITIAL_FUNCTIONS
        .iter()
        .map(|text| parse(text).expect("initial functions are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dismantle::top_l_by_score;
    use crate::dsl::evaluate;
    use crate::graph::fixtures::star;

    #[test]
    fn ten_valid_functions() {
        assert_eq!(initial_functions().len(), 10);
    }

    #[test]
    fn degree_ranks_star_center_first() {
        let f = &initial_functions()[0];
        let scores = evaluate(f, &star(5));
        assert_eq!(top_l_by_score(&scores, 1).unwrap().nodes(), &[0]);
    }
}
