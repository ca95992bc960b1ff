//! Exact evaluation of the finite-N visit-count statistic: the number of
//! lattice points m in the box (0, N^{1/(d-1)}]^{d-1} x R whose rotation
//! value sum_i m_i alpha_i + m_d falls in a shrinking target interval.
//!
//! The counter is a plain enumeration of the (d-1)-dimensional prefix
//! lattice; no sublinear shortcuts. Prefix sums are accumulated freshly
//! along the recursion path, so the rounding error per evaluated sum stays
//! around d*M*eps, far below the interval widths admitted by config
//! validation (sigma/N >= 1e-9).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::CenterSymbol;

/// One Monte Carlo observation: visit counts for each target interval.
pub type CountVector = Vec<u64>;

/// The box B_N: per-axis lattice range M = floor(N^{1/(d-1)}) over the
/// first d-1 coordinates, last coordinate unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    d: usize,
    m: u64,
    n_scale: f64,
}

impl BoxSpec {
    /// Build from the scaling parameter N; M = floor(N^{1/(d-1)}).
    pub fn from_n(d: usize, n_scale: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if !(n_scale.is_finite() && n_scale > 0.0) {
            return Err(Error::BadScale(n_scale));
        }
        let e = (d - 1) as i32;
        let mut m = n_scale.powf(1.0 / e as f64).floor() as i64;
        // float roots can land one off; fix against the exact integer power
        while ((m + 1) as f64).powi(e) <= n_scale {
            m += 1;
        }
        while m >= 1 && (m as f64).powi(e) > n_scale {
            m -= 1;
        }
        if m < 1 {
            return Err(Error::BoxTooSmall(n_scale));
        }
        Ok(BoxSpec {
            d,
            m: m as u64,
            n_scale,
        })
    }

    /// Build from a per-axis count M; N = M^{d-1}.
    pub fn from_m(d: usize, m: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if m < 1 {
            return Err(Error::BoxTooSmall(0.0));
        }
        let n_scale = (m as f64).powi((d - 1) as i32);
        if !n_scale.is_finite() {
            return Err(Error::BadScale(n_scale));
        }
        Ok(BoxSpec { d, m, n_scale })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Per-axis lattice range M.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Scaling parameter N.
    pub fn n_scale(&self) -> f64 {
        self.n_scale
    }

    /// Number of prefix lattice points, M^{d-1}.
    pub fn prefix_count(&self) -> f64 {
        (self.m as f64).powi((self.d - 1) as i32)
    }

    /// Exact mean of the visit count under uniform alpha: M^{d-1} sigma / N.
    pub fn exact_mean(&self, sigma: f64) -> f64 {
        self.prefix_count() * sigma / self.n_scale
    }
}

/// One shrinking target: center symbol xi, offset tau, length sigma.
/// At scale N the target is the open interval (xi + tau/N, xi + (tau+sigma)/N),
/// counted with multiplicity over the unconstrained last coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub xi: CenterSymbol,
    pub tau: f64,
    pub sigma: f64,
}

impl IntervalSpec {
    pub fn new(xi: CenterSymbol, tau: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::BadSigma(sigma));
        }
        if !tau.is_finite() {
            return Err(Error::BadConfig {
                field: "tau",
                reason: format!("not finite: {tau}"),
            });
        }
        Ok(IntervalSpec { xi, tau, sigma })
    }

    /// Endpoints (a, b) of the target window on the real line at scale N.
    pub fn window(&self, n_scale: f64) -> (f64, f64) {
        let base = self.xi.value();
        (
            base + self.tau / n_scale,
            base + (self.tau + self.sigma) / n_scale,
        )
    }
}

/// The rotation vector alpha, d-1 coordinates in [0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationVector(Vec<f64>);

impl RotationVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for &a in &coords {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::AlphaRange(a));
            }
        }
        Ok(RotationVector(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of integers strictly inside the open interval (x, y).
/// ceil(y) - floor(x) - 1 is exact for every endpoint configuration,
/// including exact-integer endpoints (which are excluded).
#[inline]
fn integers_in_open(x: f64, y: f64) -> u64 {
    if y <= x {
        return 0;
    }
    let k = y.ceil() - x.floor() - 1.0;
    if k <= 0.0 {
        0
    } else {
        k as u64
    }
}

fn check_alpha(alpha: &RotationVector, bx: &BoxSpec) -> Result<()> {
    if alpha.len() != bx.d() - 1 {
        return Err(Error::AlphaLength {
            got: alpha.len(),
            expected: bx.d() - 1,
        });
    }
    Ok(())
}

/// Enumerate all prefix sums sum_i m_i alpha_i, m in {1..M}^{d-1}.
/// Partial sums are carried down the recursion, so each leaf value is a
/// fresh length-(d-1) accumulation.
fn for_each_prefix_sum(alpha: &[f64], m: u64, f: &mut impl FnMut(f64)) {
    match alpha {
        [] => f(0.0),
        [a] => {
            for k in 1..=m {
                f(k as f64 * a);
            }
        }
        [a, rest @ ..] => {
            for k in 1..=m {
                let s = k as f64 * a;
                descend(rest, m, s, f);
            }
        }
    }
}

fn descend(alpha: &[f64], m: u64, prefix: f64, f: &mut impl FnMut(f64)) {
    match alpha {
        [] => f(prefix),
        [a] => {
            for k in 1..=m {
                f(prefix + k as f64 * a);
            }
        }
        [a, rest @ ..] => {
            for k in 1..=m {
                descend(rest, m, prefix + k as f64 * a, f);
            }
        }
    }
}

/// Visit count of one interval: the number of (m_1..m_{d-1}, m_d) with
/// prefix in {1..M}^{d-1}, m_d any integer, and rotation value strictly
/// inside the target window.
pub fn count_visits(
    alpha: &RotationVector,
    bx: &BoxSpec,
    interval: &IntervalSpec,
) -> Result<u64> {
    check_alpha(alpha, bx)?;
    let (a, b) = interval.window(bx.n_scale());
    let mut total = 0u64;
    for_each_prefix_sum(alpha.coords(), bx.m(), &mut |s| {
        total += integers_in_open(a - s, b - s);
    });
    Ok(total)
}

/// Joint visit counts for several intervals in a single pass over the
/// prefix lattice. Component j equals `count_visits` for interval j.
pub fn count_visits_joint(
    alpha: &RotationVector,
    bx: &BoxSpec,
    intervals: &[IntervalSpec],
) -> Result<CountVector> {
    if intervals.is_empty() {
        return Err(Error::NoIntervals);
    }
    check_alpha(alpha, bx)?;
    let windows: Vec<(f64, f64)> = intervals
        .iter()
        .map(|iv| iv.window(bx.n_scale()))
        .collect();
    let mut counts = vec![0u64; intervals.len()];
    for_each_prefix_sum(alpha.coords(), bx.m(), &mut |s| {
        for (c, &(a, b)) in counts.iter_mut().zip(&windows) {
            *c += integers_in_open(a - s, b - s);
        }
    });
    Ok(counts)
}

/// Number of lattice points whose rotation value equals `value` exactly
/// (i.e. value - prefix sum is an exact integer in f64). Used to detect
/// the measure-zero boundary-hit events excluded by the open intervals.
pub fn exact_hits(alpha: &RotationVector, bx: &BoxSpec, value: f64) -> Result<u64> {
    check_alpha(alpha, bx)?;
    let mut hits = 0u64;
    for_each_prefix_sum(alpha.coords(), bx.m(), &mut |s| {
        let x = value - s;
        if x == x.floor() {
            hits += 1;
        }
    });
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::CenterSymbol;

    fn sym(s: &str) -> CenterSymbol {
        s.parse().unwrap()
    }

    fn iv(xi: &str, tau: f64, sigma: f64) -> IntervalSpec {
        IntervalSpec::new(sym(xi), tau, sigma).unwrap()
    }

    /// Naive oracle: scan m_d over an explicit safe range and test the
    /// strict inequalities directly. Independent of integers_in_open.
    fn count_bruteforce(alpha: &RotationVector, bx: &BoxSpec, interval: &IntervalSpec) -> u64 {
        let (a, b) = interval.window(bx.n_scale());
        let mut total = 0;
        let mut prefixes: Vec<f64> = Vec::new();
        for_each_prefix_sum(alpha.coords(), bx.m(), &mut |s| prefixes.push(s));
        for s in prefixes {
            let lo = (a - s).floor() as i64 - 2;
            let hi = (b - s).ceil() as i64 + 2;
            for md in lo..=hi {
                let v = s + md as f64;
                if v > a && v < b {
                    total += 1;
                }
            }
        }
        total
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BoxSpec::from_n(1, 10.0).is_err());
        assert!(BoxSpec::from_n(2, 0.5).is_err()); // M = 0
        assert!(BoxSpec::from_n(2, -3.0).is_err());
        assert!(BoxSpec::from_m(3, 0).is_err());
        assert!(IntervalSpec::new(sym("0"), 0.0, 0.0).is_err());
        assert!(IntervalSpec::new(sym("0"), 0.0, -1.0).is_err());
        assert!(RotationVector::new(vec![1.0]).is_err());
        assert!(RotationVector::new(vec![-0.1]).is_err());

        let bx = BoxSpec::from_n(3, 16.0).unwrap();
        let alpha = RotationVector::new(vec![0.3]).unwrap(); // wrong length
        assert!(count_visits(&alpha, &bx, &iv("0", 0.0, 1.0)).is_err());
    }

    #[test]
    fn m_from_n_is_exact_at_integer_powers() {
        assert_eq!(BoxSpec::from_n(2, 9.0).unwrap().m(), 9);
        assert_eq!(BoxSpec::from_n(3, 16.0).unwrap().m(), 4);
        assert_eq!(BoxSpec::from_n(4, 1000.0).unwrap().m(), 10);
        assert_eq!(BoxSpec::from_n(4, 999.0).unwrap().m(), 9);
        assert_eq!(BoxSpec::from_n(8, 78125.0).unwrap().m(), 5);
        let bx = BoxSpec::from_m(5, 10).unwrap();
        assert_eq!(bx.n_scale(), 1e4);
    }

    #[test]
    fn degenerate_alpha_zero_misses() {
        // all orbit points sit at integers; target (0.5, 0.7) catches none
        let bx = BoxSpec::from_n(2, 10.0).unwrap();
        let alpha = RotationVector::new(vec![0.0]).unwrap();
        let n = count_visits(&alpha, &bx, &iv("1/2", 0.0, 2.0)).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn one_third_orbit_hand_count() {
        // orbit values 1/3, 2/3, 0 repeating; (0, 0.5) catches m = 1, 4, 7
        let bx = BoxSpec::from_n(2, 9.0).unwrap();
        let alpha = RotationVector::new(vec![1.0 / 3.0]).unwrap();
        let n = count_visits(&alpha, &bx, &iv("0", 0.0, 4.5)).unwrap();
        assert_eq!(n, 3);
    }

    #[test]
    fn window_longer_than_one_counts_multiplicity() {
        // sigma = 2N: every prefix contributes exactly 2 integers
        let bx = BoxSpec::from_n(3, 16.0).unwrap();
        let alpha = RotationVector::new(vec![0.123, 0.456]).unwrap();
        let n = count_visits(&alpha, &bx, &iv("3/10", 0.0, 32.0)).unwrap();
        assert_eq!(n, 32);
    }

    #[test]
    fn joint_duplicates_and_reduction_to_single() {
        let bx = BoxSpec::from_n(2, 9.0).unwrap();
        let alpha = RotationVector::new(vec![1.0 / 3.0]).unwrap();
        let a = iv("0", 0.0, 4.5);
        let joint = count_visits_joint(&alpha, &bx, &[a.clone(), a.clone()]).unwrap();
        assert_eq!(joint, vec![3, 3]);
        let single = count_visits_joint(&alpha, &bx, &[a.clone()]).unwrap();
        assert_eq!(single[0], count_visits(&alpha, &bx, &a).unwrap());
    }

    #[test]
    fn joint_hand_example() {
        let bx = BoxSpec::from_n(2, 9.0).unwrap();
        let alpha = RotationVector::new(vec![1.0 / 3.0]).unwrap();
        let list = [iv("0", 0.0, 4.5), iv("1/2", 0.0, 2.0)];
        let joint = count_visits_joint(&alpha, &bx, &list).unwrap();
        assert_eq!(joint, vec![3, 0]);
    }

    #[test]
    fn empty_interval_list_rejected() {
        let bx = BoxSpec::from_n(2, 9.0).unwrap();
        let alpha = RotationVector::new(vec![0.5]).unwrap();
        assert!(count_visits_joint(&alpha, &bx, &[]).is_err());
    }

    #[test]
    fn integers_in_open_cases() {
        assert_eq!(integers_in_open(0.5, 2.5), 2);
        assert_eq!(integers_in_open(0.0, 2.0), 1); // endpoints excluded
        assert_eq!(integers_in_open(0.0, 1.0), 0);
        assert_eq!(integers_in_open(0.0, 0.5), 0);
        assert_eq!(integers_in_open(-0.5, 0.5), 1); // zero inside
        assert_eq!(integers_in_open(1.0, 4.0), 2);
        assert_eq!(integers_in_open(0.3, 2.3), 2);
        assert_eq!(integers_in_open(2.0, 2.0), 0);
        assert_eq!(integers_in_open(3.0, 2.0), 0);
    }

    #[test]
    fn matches_bruteforce_on_small_boxes() {
        let mut rng_state = 0x5ee0_d00d_u64;
        let mut next = move || {
            // splitmix64, plenty for test data
            rng_state = rng_state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = rng_state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };
        for d in [2usize, 3] {
            for m in [1u64, 2, 7, 30] {
                let bx = BoxSpec::from_m(d, m).unwrap();
                for _ in 0..12 {
                    let alpha =
                        RotationVector::new((0..d - 1).map(|_| next() * 0.999).collect()).unwrap();
                    let interval = IntervalSpec::new(
                        sym("irr:sqrt2"),
                        next() * 4.0 - 2.0,
                        next() * 3.0 * bx.n_scale().min(4.0) + 0.1,
                    )
                    .unwrap();
                    let fast = count_visits(&alpha, &bx, &interval).unwrap();
                    let slow = count_bruteforce(&alpha, &bx, &interval);
                    assert_eq!(fast, slow, "d={d} m={m} {interval:?}");
                }
            }
        }
    }

    #[test]
    fn shift_by_integer_multiples_of_n_invariant() {
        // dyadic data keeps all float arithmetic exact, so the invariance
        // count(tau) == count(tau + k*N) holds bit-for-bit
        let bx = BoxSpec::from_n(2, 1024.0).unwrap();
        let alpha = RotationVector::new(vec![0.7071067811865476]).unwrap();
        for k in [-3i32, -1, 1, 2, 5] {
            let base = iv("1/4", 0.5, 1.25);
            let shifted = iv("1/4", 0.5 + k as f64 * 1024.0, 1.25);
            assert_eq!(
                count_visits(&alpha, &bx, &base).unwrap(),
                count_visits(&alpha, &bx, &shifted).unwrap(),
                "k={k}"
            );
        }
    }

    #[test]
    fn monotone_in_sigma() {
        let bx = BoxSpec::from_n(2, 100.0).unwrap();
        let alpha = RotationVector::new(vec![0.2938471]).unwrap();
        let mut prev = 0;
        for steps in 1..=40 {
            let n = count_visits(&alpha, &bx, &iv("irr:golden", -3.0, steps as f64 * 0.5))
                .unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn additivity_with_boundary_correction() {
        // abutting open intervals lose exactly the boundary hits
        let bx = BoxSpec::from_n(2, 512.0).unwrap();
        let alpha = RotationVector::new(vec![0.33203125]).unwrap(); // dyadic
        let (tau, s1, s2) = (0.25, 1.5, 2.25);
        let left = iv("1/8", tau, s1);
        let right = iv("1/8", tau + s1, s2);
        let merged = iv("1/8", tau, s1 + s2);
        let boundary = sym("1/8").value() + (tau + s1) / bx.n_scale();
        let hits = exact_hits(&alpha, &bx, boundary).unwrap();
        let (cl, cr, cm) = (
            count_visits(&alpha, &bx, &left).unwrap(),
            count_visits(&alpha, &bx, &right).unwrap(),
            count_visits(&alpha, &bx, &merged).unwrap(),
        );
        assert_eq!(cl + cr + hits, cm);
    }

    #[test]
    fn exact_hits_detects_lattice_landings() {
        // alpha = 0.25, M = 8: prefix sums are k/4; value - sum is an exact
        // integer only when the sum is itself an integer away
        let bx = BoxSpec::from_n(2, 8.0).unwrap();
        let alpha = RotationVector::new(vec![0.25]).unwrap();
        assert_eq!(exact_hits(&alpha, &bx, 2.0).unwrap(), 2); // k = 4, 8
        assert_eq!(exact_hits(&alpha, &bx, 2.25).unwrap(), 2); // k = 1, 5
        assert_eq!(exact_hits(&alpha, &bx, 2.1).unwrap(), 0);
    }

    #[test]
    fn empirical_mean_matches_exact_mean() {
        // uniform alpha => E[count] = M^{d-1} sigma / N exactly
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xfeed);
        let bx = BoxSpec::from_m(3, 12).unwrap(); // N = 144
        let interval = iv("irr:sqrt2", -0.5, 2.0);
        let samples = 20_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..samples {
            let alpha =
                RotationVector::new((0..2).map(|_| rng.random::<f64>()).collect()).unwrap();
            let c = count_visits(&alpha, &bx, &interval).unwrap() as f64;
            sum += c;
            sumsq += c * c;
        }
        let mean = sum / samples as f64;
        let var = (sumsq / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        let exact = bx.exact_mean(interval.sigma);
        assert!(
            (mean - exact).abs() <= 4.0 * se.max(1e-12),
            "mean {mean} vs exact {exact} (se {se})"
        );
    }
}
