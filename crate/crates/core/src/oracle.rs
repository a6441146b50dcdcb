//! Exhaustive throughput maximization over all `2^n` active sets.
//!
//! Subsets are visited in Gray-code order so each step toggles one link and
//! the per-receiver interference is updated in `O(n)`. Candidates within a
//! small tolerance of the incumbent are re-evaluated exactly with
//! [`netmodel::throughput`], so the reported maximum is reproduced bit for
//! bit by recomputation and ties resolve to the lexicographically smallest
//! index sequence.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::netmodel::{self, ActiveSet, GainMatrix, NetworkParams};
use crate::tblas;

pub const MAX_ORACLE_LINKS: usize = 20;

/// Relative window in which incremental values are re-checked exactly.
const TIE_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best: ActiveSet,
    pub k_star: usize,
    /// Maximum throughput in nats.
    pub throughput: f64,
    pub evaluated: u64,
}

/// Lexicographic order on the ascending index sequences of two masks.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let t = diff.trailing_zeros();
    // Both sequences agree below t; the one holding t continues with t.
    let above = !((1u64 << t) | ((1u64 << t) - 1));
    if a >> t & 1 == 1 {
        // b continues with something larger than t, or ends (then b is a prefix of a).
        b & above != 0
    } else {
        a & above == 0
    }
}

fn exact(g: &GainMatrix, mask: u64, params: &NetworkParams) -> f64 {
    netmodel::throughput(g, &ActiveSet::from_mask(mask), params)
        .map(|r| r.throughput)
        .unwrap_or(f64::NEG_INFINITY)
}

pub fn max_throughput_exhaustive(g: &GainMatrix, params: &NetworkParams) -> Result<OracleResult> {
    let n = g.n();
    if n > MAX_ORACLE_LINKS {
        return Err(Error::TooLarge {
            n,
            max: MAX_ORACLE_LINKS,
        });
    }
    let noise = params.noise();
    let mut interference = vec![0.0f64; n];
    let mut mask = 0u64;

    let mut best_mask = 0u64;
    let mut best_exact = 0.0f64;
    let mut best_approx = 0.0f64;

    let total = 1u64 << n;
    for step in 1..total {
        let link = step.trailing_zeros() as usize;
        let turning_on = mask >> link & 1 == 0;
        mask ^= 1 << link;
        for (rx, acc) in interference.iter_mut().enumerate() {
            if rx != link {
                if turning_on {
                    *acc += g.gain(link, rx);
                } else {
                    *acc -= g.gain(link, rx);
                }
            }
        }

        let mut value = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let rx = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            value += math::ln_1p(g.direct(rx) / (noise + interference[rx].max(0.0)));
        }

        let window = TIE_WINDOW * best_approx.abs().max(1.0);
        if value > best_approx + window {
            best_mask = mask;
            best_approx = value;
            best_exact = exact(g, mask, params);
        } else if value >= best_approx - window {
            let v = exact(g, mask, params);
            if v > best_exact || (v == best_exact && lex_less(mask, best_mask)) {
                best_mask = mask;
                best_approx = value;
                best_exact = v;
            }
        }
    }

    let best = ActiveSet::from_mask(best_mask);
    Ok(OracleResult {
        k_star: best.len(),
        throughput: best_exact,
        best,
        evaluated: total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `max_delta T(TBLAS(delta)) / T*`
    pub ratio: f64,
    pub best_delta: f64,
    pub tblas_throughput: f64,
    pub k_delta: usize,
    pub oracle: OracleResult,
}

/// Best threshold-rule throughput on `grid` relative to the exhaustive optimum.
pub fn tblas_optimality_gap(
    g: &GainMatrix,
    params: &NetworkParams,
    grid: &[f64],
) -> Result<GapReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let oracle = max_throughput_exhaustive(g, params)?;
    if !(oracle.throughput > 0.0) {
        return Err(Error::Config(
            "optimum throughput is zero; the gap ratio is undefined".into(),
        ));
    }
    let direct = g.direct_gains();
    let mut best: Option<(f64, f64, usize)> = None;
    for &delta in grid {
        let set = tblas::activate(&direct, delta);
        let t = netmodel::throughput(g, &set, params)?.throughput;
        if best.is_none_or(|(_, bt, _)| t > bt) {
            best = Some((delta, t, set.len()));
        }
    }
    let (best_delta, tblas_throughput, k_delta) = best.expect("grid is nonempty");
    Ok(GapReport {
        ratio: tblas_throughput / oracle.throughput,
        best_delta,
        tblas_throughput,
        k_delta,
        oracle,
    })
}

/// Index of the best set after relabeling, for equivariance checks.
pub fn relabel(set: &ActiveSet, inverse: &[usize]) -> Result<ActiveSet> {
    ActiveSet::new(
        set.iter().map(|l| inverse[l]).collect::<Vec<_>>(),
        inverse.len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{sample_gain_matrix, FadingSpec};
    use crate::rng::SeedSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn mask_of(set: &ActiveSet) -> u64 {
        set.iter().fold(0u64, |m, l| m | 1 << l)
    }

    fn params(n: usize) -> NetworkParams {
        NetworkParams::new(n, 1.0).unwrap()
    }

    /// Straight enumeration with a from-scratch throughput per subset.
    fn brute_force(g: &GainMatrix, p: &NetworkParams) -> (u64, f64) {
        let mut best = (0u64, 0.0f64);
        for mask in 0..(1u64 << g.n()) {
            let v = exact(g, mask, p);
            if v > best.1 || (v == best.1 && lex_less(mask, best.0)) {
                best = (mask, v);
            }
        }
        best
    }

    #[test]
    fn single_link() {
        let g = GainMatrix::new(1, vec![2.0]).unwrap();
        let r = max_throughput_exhaustive(&g, &params(1)).unwrap();
        assert_eq!(r.best.as_slice(), &[0]);
        assert_abs_diff_eq!(r.throughput, 3f64.ln(), epsilon = 1e-15);
        assert_eq!(r.evaluated, 2);
    }

    #[test]
    fn two_link_prefers_the_stronger_alone() {
        let g = GainMatrix::new(2, vec![2.0, 10.0, 10.0, 3.0]).unwrap();
        let r = max_throughput_exhaustive(&g, &params(2)).unwrap();
        assert_eq!(r.best.as_slice(), &[1]);
        assert_eq!(r.k_star, 1);
        assert_abs_diff_eq!(r.throughput, 4f64.ln(), epsilon = 1e-15);
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn size_guard() {
        let g = GainMatrix::new(21, vec![1.0; 21 * 21]).unwrap();
        assert_eq!(
            max_throughput_exhaustive(&g, &params(21)),
            Err(Error::TooLarge { n: 21, max: 20 })
        );
    }

    #[test]
    fn ties_break_lexicographically() {
        // Identical isolated links: every singleton ties with every other,
        // but the full set wins since there is no interference.
        let g = GainMatrix::from_fn(3, |tx, rx| if tx == rx { 1.0 } else { 0.0 }).unwrap();
        let r = max_throughput_exhaustive(&g, &params(3)).unwrap();
        assert_eq!(r.best.as_slice(), &[0, 1, 2]);
        // Symmetric heavy interference: all singletons tie at ln 2.
        let g = GainMatrix::from_fn(3, |tx, rx| if tx == rx { 1.0 } else { 100.0 }).unwrap();
        let r = max_throughput_exhaustive(&g, &params(3)).unwrap();
        assert_eq!(r.best.as_slice(), &[0]);
    }

    #[test]
    fn lex_order() {
        assert!(lex_less(0b001, 0b010)); // [0] < [1]
        assert!(lex_less(0b001, 0b011)); // [0] < [0,1]
        assert!(lex_less(0b011, 0b010)); // [0,1] < [1]
        assert!(lex_less(0b101, 0b110)); // [0,2] < [1,2]
        assert!(lex_less(0b011, 0b101)); // [0,1] < [0,2]
        assert!(!lex_less(0b110, 0b110));
        assert!(lex_less(0, 0b1)); // [] < [0]
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        for stream in 0..40 {
            let n = 1 + (stream as usize % 10);
            let g = sample_gain_matrix(&FadingSpec::Rayleigh, n, SeedSpec::new(3, stream)).unwrap();
            let p = NetworkParams::new(n, 1.0 + stream as f64).unwrap();
            let r = max_throughput_exhaustive(&g, &p).unwrap();
            let (mask, value) = brute_force(&g, &p);
            assert_eq!(mask_of(&r.best), mask);
            assert_eq!(r.throughput, value);
        }
    }

    #[test]
    fn recompute_and_dominance() {
        let mut rng = SeedSpec::new(4, 0).rng();
        for stream in 0..10 {
            let g = sample_gain_matrix(&FadingSpec::Rayleigh, 12, SeedSpec::new(4, stream + 1))
                .unwrap();
            let p = params(12);
            let r = max_throughput_exhaustive(&g, &p).unwrap();
            assert_eq!(
                netmodel::throughput(&g, &r.best, &p).unwrap().throughput,
                r.throughput
            );
            for _ in 0..100 {
                let m: u64 = rng.random_range(0..(1u64 << 12));
                assert!(r.throughput >= exact(&g, m, &p));
            }
            for d in [0.0, 0.5, 1.0, 2.0, 3.0] {
                let set = tblas::activate(&g.direct_gains(), d);
                assert!(r.throughput >= netmodel::throughput(&g, &set, &p).unwrap().throughput);
            }
        }
    }

    #[test]
    fn gap_on_two_link_example() {
        let g = GainMatrix::new(2, vec![2.0, 10.0, 10.0, 3.0]).unwrap();
        let gap = tblas_optimality_gap(&g, &params(2), &[0.0, 1.0, 2.5]).unwrap();
        assert_eq!(gap.best_delta, 2.5);
        assert_eq!(gap.ratio, 1.0);
        assert_eq!(gap.k_delta, 1);
    }

    #[test]
    fn gap_without_interference_is_one() {
        let g = sample_gain_matrix(&FadingSpec::Rayleigh, 8, SeedSpec::new(5, 0)).unwrap();
        let quiet =
            GainMatrix::from_fn(8, |tx, rx| if tx == rx { g.gain(tx, rx) } else { 1e-12 }).unwrap();
        let gap = tblas_optimality_gap(&quiet, &params(8), &[0.0, 0.5, 1.0]).unwrap();
        assert!(gap.ratio > 1.0 - 1e-9 && gap.ratio <= 1.0);
    }

    fn instance() -> impl Strategy<Value = (GainMatrix, f64)> {
        (1usize..=8).prop_flat_map(|n| {
            (proptest::collection::vec(0.0f64..4.0, n * n), 0.1f64..20.0)
                .prop_map(move |(e, snr)| (GainMatrix::new(n, e).unwrap(), snr))
        })
    }

    proptest! {
        #[test]
        fn gap_ratio_in_unit_interval((g, snr) in instance()) {
            prop_assume!(g.direct_gains().iter().any(|&x| x > 0.0));
            let p = NetworkParams::new(g.n(), snr).unwrap();
            let gap = tblas_optimality_gap(&g, &p, &[0.0, 0.5, 1.0, 2.0]).unwrap();
            prop_assert!(gap.ratio > 0.0 && gap.ratio <= 1.0);
        }

        #[test]
        fn relabeling_preserves_optimum((g, snr) in instance(), shift in 0usize..8) {
            let n = g.n();
            let p = NetworkParams::new(n, snr).unwrap();
            let perm: Vec<usize> = (0..n).map(|a| (a + shift) % n).collect();
            let mut inverse = vec![0; n];
            for (b, &old) in perm.iter().enumerate() { inverse[old] = b; }
            let r = max_throughput_exhaustive(&g, &p).unwrap();
            let pr = max_throughput_exhaustive(&g.permuted(&perm).unwrap(), &p).unwrap();
            prop_assert!((r.throughput - pr.throughput).abs() <= 1e-12 * (1.0 + r.throughput));
            // With distinct optimal values the maximizing set is unique, so it
            // must map across. Near-ties may legitimately resolve differently.
            let mapped = relabel(&r.best, &inverse).unwrap();
            let mapped_value = netmodel::throughput(&g.permuted(&perm).unwrap(), &mapped, &p).unwrap().throughput;
            prop_assert!((mapped_value - pr.throughput).abs() <= 1e-12 * (1.0 + pr.throughput));
        }
    }
}
