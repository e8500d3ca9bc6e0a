//! Line-oriented run summaries.

use num_rational::BigRational;
use stabnum::geom::LineFamily;
use stabnum::instance::{rational_string, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub problem: Problem,
    pub family: LineFamily,
    pub k_frac: f64,
    pub k_frac_exact: Option<BigRational>,
    pub ceil_bound: usize,
    pub k_rounding: usize,
    /// None when the time limit stopped branch-and-bound.
    pub k_exact: Option<usize>,
    pub cuts_added: usize,
    pub nodes: usize,
    pub bound_ms: u128,
    pub rounding_ms: u128,
    pub exact_ms: u128,
}

impl RunReport {
    /// `k_rounding / max(k_exact, ceil_bound)`.
    pub fn ratio(&self) -> f64 {
        let denom = self.k_exact.unwrap_or(0).max(self.ceil_bound).max(1);
        self.k_rounding as f64 / denom as f64
    }

    pub fn render(&self) -> String {
        let mut lines = vec![
            format!("instance={}", self.instance),
            format!("problem={}", self.problem),
            format!("family={}", self.family),
            format!("k_frac={:.6}", self.k_frac),
        ];
        if let Some(r) = &self.k_frac_exact {
            lines.push(format!("k_frac_exact={}", rational_string(r)));
        }
        lines.extend([
            format!("ceil_bound={}", self.ceil_bound),
            format!("k_rounding={}", self.k_rounding),
            format!(
                "k_exact={}",
                self.k_exact.map_or_else(|| "not proven".to_string(), |k| k.to_string())
            ),
            format!("ratio={:.6}", self.ratio()),
            format!("cuts_added={}", self.cuts_added),
            format!("bnb_nodes={}", self.nodes),
            format!("time_bound_ms={}", self.bound_ms),
            format!("time_rounding_ms={}", self.rounding_ms),
            format!("time_exact_ms={}", self.exact_ms),
        ]);
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        RunReport {
            instance: "sq".into(),
            problem: Problem::Matching,
            family: LineFamily::AxisParallel,
            k_frac: 1.5,
            k_frac_exact: Some(BigRational::new(3.into(), 2.into())),
            ceil_bound: 2,
            k_rounding: 3,
            k_exact: Some(2),
            cuts_added: 0,
            nodes: 1,
            bound_ms: 0,
            rounding_ms: 0,
            exact_ms: 0,
        }
    }

    #[test]
    fn ratio_uses_best_lower_value() {
        let mut r = sample();
        assert!((r.ratio() - 1.5).abs() < 1e-12);
        r.k_exact = None;
        assert!((r.ratio() - 1.5).abs() < 1e-12);
        r.ceil_bound = 1;
        assert!((r.ratio() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn renders_key_value_lines() {
        let mut r = sample();
        let text = r.render();
        assert!(text.contains("k_frac=1.500000\n"));
        assert!(text.contains("k_frac_exact=3/2\n"));
        assert!(text.contains("k_exact=2\n"));
        r.k_exact = None;
        assert!(r.render().contains("k_exact=not proven\n"));
        assert!(text.lines().all(|l| l.contains('=')));
    }
}
