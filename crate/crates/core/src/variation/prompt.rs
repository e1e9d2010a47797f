use std::fmt::Write;

use crate::dsl::ScoreExpr;

use super::VariationError;

pub const CROSSOVER_TEMPLATE: &str = include_str!("../../templates/crossover.txt");
pub const MUTATION_TEMPLATE: &str = include_str!("../../templates/mutation.txt");
pub const FORMAT_RULES: &str = include_str!("../../templates/format.txt");

/// Prompt texts with `{{name}}` placeholders.
///
/// Crossover: `{{parent_count}}`, `{{parents}}`, `{{max_offspring}}`,
/// `{{format}}`. Mutation: `{{function}}`, `{{format}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub crossover: String,
    pub mutation: String,
    pub format: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            crossover: CROSSOVER_TEMPLATE.to_string(),
            mutation: MUTATION_TEMPLATE.to_string(),
            format: FORMAT_RULES.to_string(),
        }
    }
}

impl PromptTemplates {
    /// Checks that each template has the placeholders it needs.
    pub fn validate(&self) -> Result<(), VariationError> {
        for p in ["{{parents}}", "{{format}}"] {
            if !self.crossover.contains(p) {
                return Err(VariationError::Template(p));
            }
        }
        for p in ["{{function}}", "{{format}}"] {
            if !self.mutation.contains(p) {
                return Err(VariationError::Template(p));
            }
        }
        Ok(())
    }

    pub fn render_crossover(&self, parents: &[(ScoreExpr, f64)], max_offspring: usize) -> String {
        let mut listing = String::new();
        for (i, (e, fitness)) in parents.iter().enumerate() {
            let _ = writeln!(listing, "Function {}:\n```\n{e}\n```\nScore: {fitness:.5}\n", i + 1);
        }
        self.crossover
            .replace("{{parent_count}}", &parents.len().to_string())
            .replace("{{parents}}", listing.trim_end())
            .replace("{{max_offspring}}", &max_offspring.to_string())
            .replace("{{format}}", self.format.trim_end())
    }

    pub fn render_mutation(&self, e: &ScoreExpr) -> String {
        self.mutation
            .replace("{{function}}", &e.to_string())
            .replace("{{format}}", self.format.trim_end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    const BANNED: [&str; 4] = ["network", "node", "critical", "graph"];

    #[test]
    fn templates_carry_no_task_description() {
        let t = PromptTemplates::default();
        for text in [&t.crossover, &t.mutation, &t.format] {
            let lower = text.to_lowercase();
            for word in BANNED {
                assert!(!lower.contains(word), "template mentions `{word}`");
            }
        }
        let rendered = t.render_crossover(&[(parse("degree").unwrap(), 0.5), (parse("pagerank").unwrap(), 0.4)], 2);
        let lower = rendered.to_lowercase();
        assert!(BANNED.iter().all(|w| !lower.contains(w)));
    }

    #[test]
    fn default_templates_are_complete() {
        PromptTemplates::default().validate().unwrap();
        let broken = PromptTemplates {
            mutation: "nothing".into(),
            ..Default::default()
        };
        assert!(broken.validate().is_err());
    }

    #[test]
    fn crossover_prompt_lists_functions_and_scores() {
        let t = PromptTemplates::default();
        let p = t.render_crossover(
            &[(parse("degree * 2").unwrap(), 0.25), (parse("khop(2)").unwrap(), 0.125)],
            2,
        );
        assert!(p.contains("degree * 2"));
        assert!(p.contains("khop(2)"));
        assert!(p.contains("Score: 0.25000"));
        assert!(p.contains("Score: 0.12500"));
        assert!(!p.contains("{{"));
    }

    #[test]
    fn mutation_prompt_embeds_function() {
        let p = PromptTemplates::default().render_mutation(&parse("sqrt(betweenness)").unwrap());
        assert!(p.contains("```\nsqrt(betweenness)\n```"));
        assert!(!p.contains("{{"));
    }
}
