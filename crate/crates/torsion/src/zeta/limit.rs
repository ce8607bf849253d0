use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionLimit {
    /// (p, ζ′_p(0))
    pub sequence: Vec<(f64, f64)>,
    /// |ζ′_p − ζ′_{p−1}| for consecutive members
    pub gaps: Vec<f64>,
    /// gap_{j−1} / gap_j
    pub gap_ratios: Vec<f64>,
    pub cauchy: bool,
    /// Aitken-extrapolated limit and its error estimate
    pub extrapolated: Option<(f64, f64)>,
    pub direct: Option<f64>,
    /// |ζ′_last − direct|
    pub discrepancy: Option<f64>,
}

/// Gaps at or below this are treated as converged.
const GAP_FLOOR: f64 = 1e-12;

pub fn torsion_limit(sequence: &[(f64, f64)], direct: Option<f64>) -> TorsionLimit {
    let gaps: Vec<f64> = sequence.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let gap_ratios: Vec<f64> = gaps.windows(2).map(|g| g[0] / g[1]).collect();
    // early members may wander; the second half of the gaps has to shrink
    let tail = &gaps[gaps.len() / 2..];
    let cauchy = gaps.len() >= 2 && tail.windows(2).all(|g| g[1] < g[0] || g[1] < GAP_FLOOR);
    let extrapolated = if cauchy && sequence.len() >= 4 { aitken(sequence) } else { None };
    let last = sequence.last().map(|s| s.1);
    TorsionLimit {
        sequence: sequence.to_vec(),
        gaps,
        gap_ratios,
        cauchy,
        extrapolated,
        direct,
        discrepancy: direct.zip(last).map(|(d, l)| (l - d).abs()),
    }
}

fn aitken(seq: &[(f64, f64)]) -> Option<(f64, f64)> {
    let x: Vec<f64> = seq.iter().map(|s| s.1).collect();
    let est = |i: usize| {
        let (a, b, c) = (x[i - 2], x[i - 1], x[i]);
        let den = c - 2.0 * b + a;
        if den.abs() < 1e-300 {
            c
        } else {
            c - (c - b) * (c - b) / den
        }
    };
    let n = x.len();
    let (l1, l0) = (est(n - 1), est(n - 2));
    Some((l1, (l1 - l0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_family() {
        let seq: Vec<(f64, f64)> = (3..=9).map(|p| (p as f64, 0.7)).collect();
        let r = torsion_limit(&seq, Some(0.7));
        assert!(r.cauchy);
        assert_eq!(r.extrapolated.unwrap().0, 0.7);
        assert_eq!(r.discrepancy, Some(0.0));
    }

    #[test]
    fn geometric_sequence_is_extrapolated() {
        let seq: Vec<(f64, f64)> = (0..6).map(|p| (p as f64, 1.0 + 0.5f64.powi(p))).collect();
        let r = torsion_limit(&seq, None);
        assert!(r.cauchy && r.gap_ratios.iter().all(|g| (g - 2.0).abs() < 1e-12));
        assert!((r.extrapolated.unwrap().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growing_gaps_are_flagged() {
        let seq = [(0.0, 0.0), (1.0, 1.0), (2.0, 3.0), (3.0, 7.0), (4.0, 15.0)];
        let r = torsion_limit(&seq, None);
        assert!(!r.cauchy && r.extrapolated.is_none());
    }
}
